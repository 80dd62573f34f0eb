#include "tshrink_cli/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "tshrink/error.hpp"
#include "tshrink/harness.hpp"
#include "tshrink/lasso.hpp"
#include "tshrink/marginal_kl.hpp"
#include "tshrink/posterior.hpp"
#include "tshrink/vb.hpp"
#include "tshrink_cli/csv.hpp"

namespace tshrink::cli {
namespace {

using Json = nlohmann::ordered_json;

struct SeedOption {
  std::optional<std::uint64_t> flag;

  // --seed wins, then TSHRINK_SEED, then 0.
  std::pair<std::uint64_t, std::string> resolve() const {
    if (flag) return {*flag, "flag"};
    if (const char* env = std::getenv("TSHRINK_SEED"); env != nullptr && *env != '\0') {
      const std::string_view text(env);
      std::uint64_t value = 0;
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
      if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ConfigError("TSHRINK_SEED is not an unsigned integer: '" + std::string(text) + "'");
      }
      return {value, "env"};
    }
    return {0, "default"};
  }
};

struct FitOptions {
  std::string input;
  std::string output;
  double sigma = 1.0;
  bool eb_sigma = false;
  double level = 0.95;
  std::optional<Index> blocks;
  double a0 = 2.0;
  std::optional<double> bn;
  std::string preset = "default";
  double tol = 1e-7;
  int max_iters = 500;
  std::string init = "cv-lasso";
  std::optional<double> lasso_lambda;
  SeedOption seed;
};

struct SimulateOptions {
  std::string spec = "example1a";
  std::uint64_t replication = 0;
  std::string output;
  std::string truth;
  std::optional<Index> n;
  std::optional<Index> p;
  std::optional<Index> sparsity;
  std::optional<double> signal;
  std::optional<double> sigma;
  SeedOption seed;
};

struct BenchmarkCliOptions {
  std::string spec;
  std::string methods = "tvb";
  std::optional<int> reps;
  int jobs = 1;
  double level = 0.95;
  int gibbs_iterations = 1000;
  int gibbs_burn_in = 200;
  int adam_steps = 10000;
  std::string output;
  std::string records;
  SeedOption seed;
};

struct CompareKlOptions {
  int reps = 100;
  int jobs = 1;
  int steps = 10000;
  double learning_rate = 1e-3;
  Index samples = 4;
  std::string output;
  SeedOption seed;
};

Json to_json(const VectorXd& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Json to_json(const harness::Summary& s) {
  return Json{{"mean", s.mean}, {"sd", s.sd}, {"count", s.count}};
}

// Writes to the file when a path is given, otherwise to the fallback stream.
void emit(const std::string& path, std::ostream& fallback, const std::string& text) {
  if (path.empty() || path == "-") {
    fallback << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw InputError("cannot open output file '" + path + "'");
  file << text;
  if (!file) throw InputError("failed writing output file '" + path + "'");
}

int worker_count(int jobs) {
  if (jobs < 0) throw ConfigError("--jobs must be >= 0");
  if (jobs == 0) return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return jobs;
}

std::vector<harness::Method> parse_methods(const std::string& list) {
  std::vector<harness::Method> methods;
  std::stringstream stream(list);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item.empty()) continue;
    try {
      methods.push_back(harness::parse_method(item));
    } catch (const Error&) {
      throw ConfigError("unknown method '" + item + "' (expected tvb, tmcmc or mvb)");
    }
  }
  if (methods.empty()) throw ConfigError("--methods is empty");
  return methods;
}

int cmd_fit(const FitOptions& o, std::ostream& out) {
  const auto [seed, seed_source] = o.seed.resolve();
  if (!(o.level > 0.0 && o.level < 1.0)) throw ConfigError("--level must lie in (0, 1)");
  CsvData csv = read_regression_csv(o.input);
  const Dataset data(std::move(csv.X), std::move(csv.Y));

  vb::ScalePreset preset = vb::ScalePreset::Default;
  if (o.preset == "comparison") {
    preset = vb::ScalePreset::JointMarginalComparison;
  } else if (o.preset != "default") {
    throw ConfigError("--preset must be 'default' or 'comparison'");
  }
  Hyperparameters hyper;
  hyper.a0 = o.a0;
  hyper.bn = o.bn ? *o.bn : vb::default_rate(data.n(), data.p(), o.a0, preset);
  hyper.blocks = data.p() <= 500 ? 1 : (data.p() + 99) / 100;
  hyper.sigma = o.sigma;
  hyper.noise_mode = o.eb_sigma ? NoiseMode::EmpiricalBayes : NoiseMode::Known;
  if (o.blocks) hyper.blocks = *o.blocks;
  hyper.tol = o.tol;
  hyper.max_iters = o.max_iters;
  hyper.validate(data.p());

  VectorXd init;
  Json init_json{{"method", o.init}};
  if (o.init == "cv-lasso") {
    const harness::CvLasso lasso = harness::cv_lasso(data);
    init = lasso.beta;
    init_json["lambda"] = lasso.lambda;
    init_json["sigma_hat"] = lasso.sigma;
    if (o.eb_sigma) hyper.sigma = lasso.sigma;
  } else if (o.init == "lasso") {
    const double lambda = o.lasso_lambda ? *o.lasso_lambda : harness::default_lasso_lambda(data);
    init = harness::lasso_init(data, lambda);
    init_json["lambda"] = lambda;
  } else if (o.init == "zero") {
    init = VectorXd::Zero(data.p());
  } else {
    throw ConfigError("--init must be cv-lasso, lasso or zero");
  }

  const FitResult fit = vb::fit(data, hyper, init);
  const auto selection = posterior::select_variables(fit.state, o.level);

  Json report;
  report["command"] = "fit";
  report["config"] = Json{{"input", o.input},
                          {"seed", seed},
                          {"seed_source", seed_source},
                          {"n", data.n()},
                          {"p", data.p()},
                          {"a0", hyper.a0},
                          {"bn", hyper.bn},
                          {"preset", o.preset},
                          {"noise", std::string(to_string(hyper.noise_mode))},
                          {"sigma_init", hyper.sigma},
                          {"blocks", hyper.blocks},
                          {"tol", hyper.tol},
                          {"max_iters", hyper.max_iters},
                          {"level", o.level},
                          {"init", init_json}};
  report["predictors"] = csv.predictors;
  report["mu"] = to_json(fit.state.mu);
  report["a"] = to_json(fit.state.a);
  report["b"] = to_json(fit.state.b);
  report["sigma"] = fit.state.sigma;
  Json selected = Json::array();
  Json selected_names = Json::array();
  for (const Index j : selection.selected) {
    selected.push_back(j);
    selected_names.push_back(csv.predictors[static_cast<std::size_t>(j)]);
  }
  report["selected"] = selected;
  report["selected_names"] = selected_names;
  Json intervals = Json::array();
  for (const auto& interval : selection.intervals) intervals.push_back(Json::array({interval.lo, interval.hi}));
  report["intervals"] = intervals;
  report["elbo_trace"] = fit.elbo_trace;
  report["iterations"] = fit.iterations;
  report["converged"] = fit.converged;
  report["wall_time_sec"] = fit.wall_time;
  emit(o.output, out, report.dump(2) + "\n");
  return kOk;
}

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  const auto [seed, seed_source] = o.seed.resolve();
  harness::ExperimentSpec spec;
  if (o.spec == "custom") {
    spec.name = "custom";
    spec.n = o.n.value_or(100);
    spec.p = o.p.value_or(100);
    spec.sparsity = o.sparsity.value_or(5);
    spec.rule = harness::SignalRule::RandomPositions;
    spec.signal_value = o.signal.value_or(1.0);
    spec.sigma = o.sigma.value_or(1.0);
  } else {
    spec = harness::experiment_spec(o.spec);
    if (o.n || o.p || o.sparsity || o.signal || o.sigma) {
      throw ConfigError("--n/--p/--sparsity/--signal/--sigma only apply to --spec custom");
    }
  }
  spec.seed = seed;
  spec.validate();
  const harness::Replicate rep = harness::generate(spec, o.replication);

  std::ostringstream csv;
  write_regression_csv(csv, rep.data.X(), rep.data.Y());
  emit(o.output, out, csv.str());

  if (!o.truth.empty()) {
    Json truth;
    truth["command"] = "simulate";
    truth["config"] = Json{{"spec", spec.name}, {"seed", seed},   {"seed_source", seed_source},
                           {"replication", o.replication},      {"n", spec.n},
                           {"p", spec.p},       {"sigma", spec.sigma}};
    truth["beta"] = to_json(rep.beta);
    truth["support"] = rep.support;
    emit(o.truth, out, truth.dump(2) + "\n");
  }
  return kOk;
}

int cmd_benchmark(const BenchmarkCliOptions& o, std::ostream& out, std::ostream& err) {
  const auto [seed, seed_source] = o.seed.resolve();
  harness::ExperimentSpec spec = harness::experiment_spec(o.spec);
  spec.seed = seed;
  if (o.reps) spec.replications = *o.reps;
  spec.validate();
  const std::vector<harness::Method> methods = parse_methods(o.methods);

  harness::BenchmarkOptions options;
  options.level = o.level;
  options.gibbs_iterations = o.gibbs_iterations;
  options.gibbs_burn_in = o.gibbs_burn_in;
  options.adam.steps = o.adam_steps;
  options.jobs = worker_count(o.jobs);
  if (!(o.level > 0.0 && o.level < 1.0)) throw ConfigError("--level must lie in (0, 1)");

  const harness::BenchmarkResult result = harness::run_benchmark(spec, methods, options);

  std::ostringstream csv;
  csv << "method,rmse_mean,rmse_sd,fdr_mean,fdr_sd,tpr_mean,tpr_sd,cov_signal_mean,cov_signal_sd,"
         "cov_null_mean,cov_null_sd,time_mean_sec,time_sd_sec,replications,failures,fdr_undefined,spec,seed,"
         "level,gibbs_iterations,gibbs_burn_in\n";
  for (const auto& r : result.reports) {
    csv << to_string(r.method);
    for (const harness::Summary* s : {&r.rmse, &r.fdr, &r.tpr, &r.coverage_signal, &r.coverage_null, &r.run_time}) {
      csv << ',' << format_double(s->mean) << ',' << format_double(s->sd);
    }
    csv << ',' << r.replications << ',' << r.failures << ',' << r.fdr_undefined << ',' << spec.name << ',' << seed
        << ',' << format_double(o.level) << ',' << o.gibbs_iterations << ',' << o.gibbs_burn_in << '\n';
    for (const auto& message : r.failure_messages) err << to_string(r.method) << ": " << message << '\n';
  }
  emit(o.output, out, csv.str());

  if (!o.records.empty()) {
    std::ostringstream rec;
    rec << "replication,method,ok,rmse,fdr,tpr,cov_signal,cov_null,time_sec,sigma_hat,iterations,error\n";
    for (const auto& r : result.records) {
      const auto& m = r.metrics;
      std::string error = r.error;
      for (char& c : error) {
        if (c == ',' || c == '\n') c = ';';
      }
      rec << r.replication << ',' << to_string(r.method) << ',' << (r.ok ? 1 : 0) << ',' << format_double(m.rmse)
          << ',' << format_double(m.fdr) << ',' << format_double(m.tpr) << ',' << format_double(m.coverage_signal)
          << ',' << format_double(m.coverage_null) << ',' << format_double(m.run_time) << ','
          << format_double(r.sigma_hat) << ',' << r.iterations << ',' << error << '\n';
    }
    emit(o.records, out, rec.str());
  }
  bool any_failed = false;
  for (const auto& r : result.reports) any_failed = any_failed || r.failures > 0;
  return any_failed ? kNumericError : kOk;
}

int cmd_compare_kl(const CompareKlOptions& o, std::ostream& out) {
  const auto [seed, seed_source] = o.seed.resolve();
  if (o.reps < 1) throw ConfigError("--reps must be >= 1");
  marginal::AdamOptions adam;
  adam.steps = o.steps;
  adam.learning_rate = o.learning_rate;
  adam.samples_per_step = o.samples;

  std::vector<marginal::KlComparison> results(static_cast<std::size_t>(o.reps));
  std::vector<std::string> errors(results.size());
  std::atomic<int> next{0};
  const int workers = std::min(worker_count(o.jobs), o.reps);
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int r = next++; r < o.reps; r = next++) {
          try {
            results[static_cast<std::size_t>(r)] =
                marginal::compare_joint_marginal(seed, static_cast<std::uint64_t>(r), adam);
          } catch (const Error& e) {
            errors[static_cast<std::size_t>(r)] = e.what();
          }
        }
      });
    }
  }

  std::vector<double> nonzero;
  std::vector<double> zero;
  Json per_rep = Json::array();
  int failures = 0;
  for (std::size_t r = 0; r < results.size(); ++r) {
    if (!errors[r].empty()) {
      ++failures;
      per_rep.push_back(Json{{"replication", r}, {"error", errors[r]}});
      continue;
    }
    nonzero.push_back(results[r].mse_nonzero);
    zero.push_back(results[r].mse_zero);
    per_rep.push_back(Json{{"replication", r},
                           {"mse_nonzero", results[r].mse_nonzero},
                           {"mse_zero", results[r].mse_zero},
                           {"vb_iterations", results[r].vb_iterations},
                           {"marginal_objective", results[r].marginal_objective_at_end}});
  }
  Json report;
  report["command"] = "compare-kl";
  report["config"] = Json{{"seed", seed},          {"seed_source", seed_source}, {"reps", o.reps},
                          {"steps", o.steps},      {"learning_rate", o.learning_rate},
                          {"samples_per_step", o.samples}, {"spec", "toyC"}, {"preset", "comparison"}};
  report["mse_nonzero"] = to_json(harness::summarize(nonzero));
  report["mse_zero"] = to_json(harness::summarize(zero));
  report["failures"] = failures;
  report["replications"] = per_rep;
  emit(o.output, out, report.dump(2) + "\n");
  return failures > 0 ? kNumericError : kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variational and Gibbs inference for sparse linear regression under a Student-t shrinkage prior",
               "tshrink"};
  app.require_subcommand(1);

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit the variational posterior to a CSV data set");
  fit_cmd->add_option("--input,-i", fit.input, "CSV with header; first column y, then predictors")->required();
  fit_cmd->add_option("--output,-o", fit.output, "JSON report path (default: stdout)");
  auto* sigma_opt = fit_cmd->add_option("--sigma", fit.sigma, "Known noise standard deviation")->capture_default_str();
  fit_cmd->add_flag("--eb-sigma", fit.eb_sigma, "Estimate sigma by empirical Bayes")->excludes(sigma_opt);
  fit_cmd->add_option("--level", fit.level, "Credible level for intervals and selection")->capture_default_str();
  fit_cmd->add_option("--blocks", fit.blocks, "Block count for the mean update (default: 1 if p <= 500, else ceil(p/100))");
  fit_cmd->add_option("--a0", fit.a0, "Prior Gamma shape (> 1)")->capture_default_str();
  fit_cmd->add_option("--bn", fit.bn, "Prior Gamma rate (default: from --preset)");
  fit_cmd->add_option("--preset", fit.preset, "Rate rule: default | comparison")->capture_default_str();
  fit_cmd->add_option("--tol", fit.tol, "Relative convergence threshold")->capture_default_str();
  fit_cmd->add_option("--max-iters", fit.max_iters, "Iteration cap")->capture_default_str();
  fit_cmd->add_option("--init", fit.init, "Initial mean: cv-lasso | lasso | zero")->capture_default_str();
  fit_cmd->add_option("--lasso-lambda", fit.lasso_lambda, "Penalty for --init lasso (default sd(y) sqrt(2 ln p / n))");
  fit_cmd->add_option("--seed", fit.seed.flag, "Recorded in the report (fit itself draws no randomness)");

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Write one synthetic data set as CSV");
  sim_cmd->add_option("--spec", sim.spec, "example1a | example1b | example2 | toyC | custom")->capture_default_str();
  sim_cmd->add_option("--replication", sim.replication, "Replication index")->capture_default_str();
  sim_cmd->add_option("--output,-o", sim.output, "CSV path (default: stdout)");
  sim_cmd->add_option("--truth", sim.truth, "Also write the true coefficients as JSON to this path");
  sim_cmd->add_option("--n", sim.n, "Rows (custom only)");
  sim_cmd->add_option("--p", sim.p, "Predictors (custom only)");
  sim_cmd->add_option("--sparsity", sim.sparsity, "Nonzero count (custom only)");
  sim_cmd->add_option("--signal", sim.signal, "Nonzero value (custom only)");
  sim_cmd->add_option("--sigma", sim.sigma, "Noise sd (custom only)");
  sim_cmd->add_option("--seed", sim.seed.flag, "Base seed (fallback: TSHRINK_SEED, then 0)");

  BenchmarkCliOptions bench;
  auto* bench_cmd = app.add_subcommand("benchmark", "Replicated simulation study; writes a CSV summary");
  bench_cmd->add_option("--spec", bench.spec, "example1a | example1b | example2 | toyC")->required();
  bench_cmd->add_option("--methods", bench.methods, "Comma list of tvb, tmcmc, mvb")->capture_default_str();
  bench_cmd->add_option("--reps", bench.reps, "Replications (default 100)");
  bench_cmd->add_option("--jobs,-j", bench.jobs, "Worker threads over replications (0 = all cores)")->capture_default_str();
  bench_cmd->add_option("--level", bench.level, "Credible level")->capture_default_str();
  bench_cmd->add_option("--gibbs-iterations", bench.gibbs_iterations, "Gibbs iterations")->capture_default_str();
  bench_cmd->add_option("--gibbs-burn-in", bench.gibbs_burn_in, "Gibbs burn-in")->capture_default_str();
  bench_cmd->add_option("--adam-steps", bench.adam_steps, "Optimizer steps for mvb")->capture_default_str();
  bench_cmd->add_option("--output,-o", bench.output, "CSV path (default: stdout)");
  bench_cmd->add_option("--records", bench.records, "Per-replication CSV path");
  bench_cmd->add_option("--seed", bench.seed.flag, "Base seed (fallback: TSHRINK_SEED, then 0)");

  CompareKlOptions kl;
  auto* kl_cmd = app.add_subcommand("compare-kl", "Joint versus marginal KL fits on the toy problem");
  kl_cmd->add_option("--reps", kl.reps, "Replications")->capture_default_str();
  kl_cmd->add_option("--jobs,-j", kl.jobs, "Worker threads (0 = all cores)")->capture_default_str();
  kl_cmd->add_option("--steps", kl.steps, "Optimizer steps")->capture_default_str();
  kl_cmd->add_option("--lr", kl.learning_rate, "Optimizer learning rate")->capture_default_str();
  kl_cmd->add_option("--samples", kl.samples, "Monte Carlo draws per step (>= 2)")->capture_default_str();
  kl_cmd->add_option("--output,-o", kl.output, "JSON path (default: stdout)");
  kl_cmd->add_option("--seed", kl.seed.flag, "Base seed (fallback: TSHRINK_SEED, then 0)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "tshrink: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit, out);
    if (sim_cmd->parsed()) return cmd_simulate(sim, out);
    if (bench_cmd->parsed()) return cmd_benchmark(bench, out, err);
    if (kl_cmd->parsed()) return cmd_compare_kl(kl, out);
  } catch (const InputError& e) {
    err << "tshrink: input error: " << e.what() << '\n';
    return kInputError;
  } catch (const ConfigError& e) {
    err << "tshrink: configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DomainError& e) {
    err << "tshrink: configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericError& e) {
    err << "tshrink: numeric failure: " << e.what() << '\n';
    return kNumericError;
  } catch (const Error& e) {
    err << "tshrink: " << e.what() << '\n';
    return kNumericError;
  }
  return kConfigError;
}

}  // namespace tshrink::cli
