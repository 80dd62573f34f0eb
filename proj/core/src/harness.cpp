#include "tshrink/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "tshrink/error.hpp"
#include "tshrink/gibbs.hpp"
#include "tshrink/lasso.hpp"
#include "tshrink/rng.hpp"
#include "tshrink/vb.hpp"

namespace tshrink::harness {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

MatrixXd standard_normal_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd out(rows, cols);
  // Column-major fill keeps the stream layout independent of Eigen internals.
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
  return out;
}

std::vector<Index> random_positions(Index p, Index count, Rng& rng) {
  std::vector<Index> all(static_cast<std::size_t>(p));
  std::iota(all.begin(), all.end(), Index{0});
  for (Index i = 0; i < count; ++i) {
    std::uniform_int_distribution<Index> pick(i, p - 1);
    std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng))]);
  }
  all.resize(static_cast<std::size_t>(count));
  std::sort(all.begin(), all.end());
  return all;
}

ReplicationRecord run_method(Method method, const ExperimentSpec& spec, const Replicate& rep,
                             const VectorXd& init, double sigma_hat, std::uint64_t replication,
                             const BenchmarkOptions& options) {
  ReplicationRecord record;
  record.replication = replication;
  record.method = method;
  record.sigma_hat = sigma_hat;
  try {
    const Hyperparameters hyper = experiment_hyperparameters(spec, rep.data.n(), rep.data.p(), sigma_hat);
    switch (method) {
      case Method::TVb: {
        const FitResult fit = vb::fit(rep.data, hyper, init);
        const auto selection = posterior::select_variables(fit.state, options.level);
        record.metrics = evaluate(posterior::posterior_mean(fit.state), selection, rep.beta, rep.support, fit.wall_time);
        record.sigma_hat = fit.state.sigma;
        record.iterations = fit.iterations;
        break;
      }
      case Method::TMcmc: {
        gibbs::GibbsConfig config;
        config.iterations = options.gibbs_iterations;
        config.burn_in = options.gibbs_burn_in;
        config.blocks = spec.gibbs_blocks;
        config.seed = mix64(spec.seed) ^ replication;
        const gibbs::GibbsChain chain = gibbs::gibbs_fit(rep.data, hyper, config, init);
        const auto selection = posterior::select_from_intervals(chain.intervals(options.level), options.level);
        record.metrics = evaluate(chain.mean(), selection, rep.beta, rep.support, chain.wall_time);
        record.iterations = config.iterations;
        break;
      }
      case Method::MarginalVb: {
        Rng rng = make_rng(spec.seed, Stream::MarginalKl, replication);
        const auto start = std::chrono::steady_clock::now();
        const marginal::MarginalState state = marginal::fit_marginal(rep.data, hyper, init, options.adam, rng);
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const VectorXd scale = state.scale();
        const VectorXd df = state.df();
        std::vector<posterior::Interval> intervals;
        for (Index j = 0; j < state.size(); ++j) {
          intervals.push_back(posterior::t_interval(state.mu_tilde[j], scale[j], df[j], options.level));
        }
        const auto selection = posterior::select_from_intervals(std::move(intervals), options.level);
        record.metrics = evaluate(state.mu_tilde, selection, rep.beta, rep.support, elapsed);
        record.iterations = options.adam.steps;
        break;
      }
    }
  } catch (const Error& e) {
    record.ok = false;
    record.error = e.what();
  }
  return record;
}

}  // namespace

void ExperimentSpec::validate() const {
  if (n < 1 || p < 1) throw ConfigError("experiment: n and p must be >= 1");
  if (sparsity < 0 || sparsity > p) throw ConfigError("experiment: sparsity must lie in [0, p]");
  if (rule == SignalRule::Leading && static_cast<Index>(leading.size()) > p)
    throw ConfigError("experiment: more leading coefficients than predictors");
  if (replications < 1) throw ConfigError("experiment: replications must be >= 1");
  if (!(sigma > 0.0)) throw ConfigError("experiment: sigma must be positive");
  if (vb_blocks < 1 || vb_blocks > p || gibbs_blocks < 1 || gibbs_blocks > p)
    throw ConfigError("experiment: block counts must lie in [1, p]");
}

ExperimentSpec experiment_spec(std::string_view name) {
  ExperimentSpec spec;
  spec.name = std::string(name);
  if (name == "example1a" || name == "example1b") {
    spec.n = 100;
    spec.p = 400;
    spec.sparsity = 20;
    spec.rule = SignalRule::RandomPositions;
    spec.signal_value = std::log(100.0) * (name == "example1a" ? 1.0 : 0.5);
    spec.sigma = 4.0;
    spec.noise = NoiseMode::Known;
    spec.vb_blocks = 1;
    spec.gibbs_blocks = 5;
  } else if (name == "example2") {
    spec.n = 100;
    spec.p = 1000;
    spec.rule = SignalRule::Leading;
    spec.leading = {3.0, 2.0, 1.0};
    spec.sparsity = 3;
    spec.sigma = 1.0;
    spec.noise = NoiseMode::EmpiricalBayes;
    spec.vb_blocks = 10;
    spec.gibbs_blocks = 10;
  } else if (name == "toyC") {
    spec.n = 100;
    spec.p = 100;
    spec.rule = SignalRule::Leading;
    spec.leading = {10.0, 10.0, 10.0, 10.0, 10.0};
    spec.sparsity = 5;
    spec.sigma = 1.0;
    spec.noise = NoiseMode::Known;
    spec.vb_blocks = 1;
    spec.gibbs_blocks = 1;
  } else {
    throw ConfigError("unknown experiment '" + std::string(name) + "' (expected example1a, example1b, example2, toyC)");
  }
  return spec;
}

Replicate generate(const ExperimentSpec& spec, std::uint64_t replication) {
  spec.validate();
  Rng design_rng = make_rng(spec.seed, Stream::Design, replication);
  Rng noise_rng = make_rng(spec.seed, Stream::Noise, replication);
  Rng position_rng = make_rng(spec.seed, Stream::SignalPositions, replication);

  MatrixXd X = standard_normal_matrix(spec.n, spec.p, design_rng);
  VectorXd beta = VectorXd::Zero(spec.p);
  if (spec.rule == SignalRule::RandomPositions) {
    for (Index j : random_positions(spec.p, spec.sparsity, position_rng)) beta[j] = spec.signal_value;
  } else {
    for (std::size_t j = 0; j < spec.leading.size(); ++j) beta[static_cast<Index>(j)] = spec.leading[j];
  }
  const VectorXd noise = standard_normal_matrix(spec.n, 1, noise_rng).col(0);
  VectorXd Y = X * beta + spec.sigma * noise;

  std::vector<Index> support;
  for (Index j = 0; j < spec.p; ++j)
    if (beta[j] != 0.0) support.push_back(j);
  return Replicate{Dataset(std::move(X), std::move(Y)), std::move(beta), std::move(support)};
}

ReplicationMetrics evaluate(const VectorXd& estimate, const posterior::SelectionResult& selection,
                            const VectorXd& beta0, const std::vector<Index>& support, double run_time) {
  const Index p = beta0.size();
  if (estimate.size() != p || static_cast<Index>(selection.intervals.size()) != p) {
    throw InputError("evaluate: estimate, intervals and truth must have the same length");
  }
  ReplicationMetrics m;
  m.run_time = run_time;
  m.rmse = (estimate - beta0).norm() / std::sqrt(static_cast<double>(p));

  std::vector<bool> in_support(static_cast<std::size_t>(p), false);
  for (Index j : support) in_support[static_cast<std::size_t>(j)] = true;
  Index true_selected = 0;
  for (Index j : selection.selected)
    if (in_support[static_cast<std::size_t>(j)]) ++true_selected;
  const auto n_selected = static_cast<double>(selection.selected.size());
  m.fdr = selection.selected.empty() ? kNaN : (n_selected - static_cast<double>(true_selected)) / n_selected;
  m.tpr = support.empty() ? kNaN : static_cast<double>(true_selected) / static_cast<double>(support.size());

  Index covered_signal = 0;
  Index covered_null = 0;
  for (Index j = 0; j < p; ++j) {
    if (!selection.intervals[static_cast<std::size_t>(j)].contains(beta0[j])) continue;
    if (in_support[static_cast<std::size_t>(j)]) {
      ++covered_signal;
    } else {
      ++covered_null;
    }
  }
  const auto n_signal = static_cast<double>(support.size());
  const double n_null = static_cast<double>(p) - n_signal;
  m.coverage_signal = support.empty() ? kNaN : static_cast<double>(covered_signal) / n_signal;
  m.coverage_null = n_null > 0 ? static_cast<double>(covered_null) / n_null : kNaN;
  return m;
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  double sum = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) {
      sum += v;
      ++s.count;
    }
  }
  if (s.count == 0) {
    s.mean = kNaN;
    s.sd = kNaN;
    return s;
  }
  s.mean = sum / s.count;
  if (s.count > 1) {
    double ss = 0.0;
    for (double v : values)
      if (std::isfinite(v)) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / (s.count - 1));
  }
  return s;
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::TVb:
      return "tvb";
    case Method::TMcmc:
      return "tmcmc";
    case Method::MarginalVb:
      return "mvb";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "tvb" || name == "t-VB") return Method::TVb;
  if (name == "tmcmc" || name == "t-MCMC") return Method::TMcmc;
  if (name == "mvb" || name == "marginal-VB") return Method::MarginalVb;
  throw ConfigError("unknown method '" + std::string(name) + "' (expected tvb, tmcmc, mvb)");
}

Hyperparameters experiment_hyperparameters(const ExperimentSpec& spec, Index n, Index p, double sigma_hat) {
  const auto preset = spec.name == "toyC" ? vb::ScalePreset::JointMarginalComparison : vb::ScalePreset::Default;
  Hyperparameters hyper = vb::default_hyperparameters(n, p, preset);
  hyper.blocks = spec.vb_blocks;
  hyper.noise_mode = spec.noise;
  hyper.sigma = spec.noise == NoiseMode::Known ? spec.sigma : sigma_hat;
  return hyper;
}

BenchmarkResult run_benchmark(const ExperimentSpec& spec, const std::vector<Method>& methods,
                              const BenchmarkOptions& options) {
  spec.validate();
  if (methods.empty()) throw ConfigError("run_benchmark: no methods requested");
  const auto reps = static_cast<std::size_t>(spec.replications);
  const std::size_t per_rep = methods.size();
  std::vector<ReplicationRecord> records(reps * per_rep);

  std::mutex callback_mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < reps; r = next++) {
      const auto replication = static_cast<std::uint64_t>(r);
      std::optional<Replicate> rep;
      VectorXd init;
      double sigma_hat = 0.0;
      std::string setup_error;
      try {
        rep.emplace(generate(spec, replication));
        const CvLasso lasso = cv_lasso(rep->data);
        init = lasso.beta;
        sigma_hat = lasso.sigma;
      } catch (const Error& e) {
        setup_error = e.what();
      }
      for (std::size_t m = 0; m < per_rep; ++m) {
        ReplicationRecord record;
        if (setup_error.empty()) {
          record = run_method(methods[m], spec, *rep, init, sigma_hat, replication, options);
        } else {
          record.replication = replication;
          record.method = methods[m];
          record.ok = false;
          record.error = "setup: " + setup_error;
        }
        if (options.on_record) {
          std::lock_guard lock(callback_mutex);
          options.on_record(record);
        }
        records[r * per_rep + m] = std::move(record);
      }
    }
  };
  const int jobs = std::max(1, options.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }

  BenchmarkResult result;
  for (std::size_t m = 0; m < per_rep; ++m) {
    MetricsReport report;
    report.method = methods[m];
    report.replications = spec.replications;
    std::vector<double> rmse, fdr, tpr, cov_s, cov_n, time;
    for (std::size_t r = 0; r < reps; ++r) {
      const ReplicationRecord& rec = records[r * per_rep + m];
      if (!rec.ok) {
        ++report.failures;
        report.failure_messages.push_back("replication " + std::to_string(rec.replication) + ": " + rec.error);
        continue;
      }
      rmse.push_back(rec.metrics.rmse);
      fdr.push_back(rec.metrics.fdr);
      if (std::isnan(rec.metrics.fdr)) ++report.fdr_undefined;
      tpr.push_back(rec.metrics.tpr);
      cov_s.push_back(rec.metrics.coverage_signal);
      cov_n.push_back(rec.metrics.coverage_null);
      time.push_back(rec.metrics.run_time);
    }
    report.rmse = summarize(rmse);
    report.fdr = summarize(fdr);
    report.tpr = summarize(tpr);
    report.coverage_signal = summarize(cov_s);
    report.coverage_null = summarize(cov_n);
    report.run_time = summarize(time);
    result.reports.push_back(std::move(report));
  }
  result.records = std::move(records);
  return result;
}

}  // namespace tshrink::harness
