#include "tshrink/marginal_kl.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "tshrink/error.hpp"
#include "tshrink/harness.hpp"
#include "tshrink/lasso.hpp"
#include "tshrink/special_functions.hpp"
#include "tshrink/student_t.hpp"
#include "tshrink/vb.hpp"

namespace tshrink::marginal {
namespace {

struct Prior {
  double df;
  double scale;
  double log_constant;

  explicit Prior(const Hyperparameters& hyper)
      : df(2.0 * hyper.a0),
        scale(std::sqrt(hyper.bn / hyper.a0)),
        log_constant(student_t::log_normalizer(df) - std::log(scale)) {}

  double log_density(double beta) const {
    const double z = beta / scale;
    return log_constant - 0.5 * (df + 1.0) * std::log1p(z * z / df);
  }
  double d_log_density(double beta) const { return -(df + 1.0) * beta / (df * scale * scale + beta * beta); }
};

// d/d nu of the differential entropy of the standard t.
double entropy_derivative(double nu) {
  return 0.25 * (nu + 1.0) * (special::trigamma(0.5 * (nu + 1.0)) - special::trigamma(0.5 * nu)) + 0.5 / nu;
}

void check_shapes(const MarginalState& state, const Dataset& data) {
  if (state.mu_tilde.size() != data.p() || state.log_scale.size() != data.p() ||
      state.log_df_excess.size() != data.p()) {
    throw InputError("marginal: state dimension does not match the data");
  }
}

}  // namespace

MarginalState from_joint(const VariationalState& state) {
  MarginalState out;
  out.mu_tilde = state.mu;
  out.log_scale = 0.5 * (state.b.array() / state.a.array()).log();
  out.log_df_excess = (2.0 * state.a.array() - 2.0).log();
  return out;
}

MatrixXd draw_standard_t(const VectorXd& df, Index n_samples, Rng& rng) {
  MatrixXd out(n_samples, df.size());
  for (Index j = 0; j < df.size(); ++j) {
    std::student_t_distribution<double> dist(df[j]);
    for (Index s = 0; s < n_samples; ++s) out(s, j) = dist(rng);
  }
  return out;
}

double expected_neg_loglik(const MarginalState& state, const Dataset& data, const Hyperparameters& hyper) {
  check_shapes(state, data);
  const double n = static_cast<double>(data.n());
  const double s2 = hyper.sigma * hyper.sigma;
  const VectorXd excess = state.log_df_excess.array().exp();
  const VectorXd variance = (2.0 * state.log_scale.array()).exp() * (2.0 + excess.array()) / excess.array();
  const double rss = (data.Y() - data.X() * state.mu_tilde).squaredNorm();
  return n * std::log(hyper.sigma) + 0.5 * n * std::log(2.0 * std::numbers::pi) +
         (rss + data.gram_diag().dot(variance)) / (2.0 * s2);
}

Estimate marginal_objective(const MarginalState& state, const Dataset& data, const Hyperparameters& hyper,
                            const MatrixXd& standard_draws) {
  check_shapes(state, data);
  if (standard_draws.cols() != data.p() || standard_draws.rows() < 1) {
    throw InputError("marginal_objective: draws must be n_samples x p with n_samples >= 1");
  }
  const Prior prior(hyper);
  const VectorXd scale = state.scale();
  const VectorXd df = state.df();
  const Index samples = standard_draws.rows();

  VectorXd log_constant(data.p());
  for (Index j = 0; j < data.p(); ++j) log_constant[j] = student_t::log_normalizer(df[j]) - state.log_scale[j];

  VectorXd kl(samples);
  for (Index s = 0; s < samples; ++s) {
    double total = 0.0;
    for (Index j = 0; j < data.p(); ++j) {
      const double t = standard_draws(s, j);
      const double beta = state.mu_tilde[j] + scale[j] * t;
      total += log_constant[j] - 0.5 * (df[j] + 1.0) * std::log1p(t * t / df[j]) - prior.log_density(beta);
    }
    kl[s] = total;
  }
  Estimate out;
  const double mean = kl.mean();
  out.value = expected_neg_loglik(state, data, hyper) + mean;
  if (samples > 1) {
    const double var = (kl.array() - mean).square().sum() / static_cast<double>(samples - 1);
    out.standard_error = std::sqrt(var / static_cast<double>(samples));
  }
  if (!std::isfinite(out.value)) throw NumericError("marginal_objective: non-finite objective");
  return out;
}

Estimate mc_negative_elbo_marginal(const MarginalState& state, const Dataset& data, const Hyperparameters& hyper,
                                   Index n_samples, Rng& rng) {
  if (n_samples < 1) throw DomainError("mc_negative_elbo_marginal: n_samples must be >= 1");
  return marginal_objective(state, data, hyper, draw_standard_t(state.df(), n_samples, rng));
}

MarginalGradient marginal_gradient(const MarginalState& state, const Dataset& data, const Hyperparameters& hyper,
                                   const MatrixXd& standard_draws) {
  check_shapes(state, data);
  const Index samples = standard_draws.rows();
  if (standard_draws.cols() != data.p() || samples < 2) {
    throw InputError("marginal_gradient: draws must be n_samples x p with n_samples >= 2");
  }
  const Prior prior(hyper);
  const double s2 = hyper.sigma * hyper.sigma;
  const VectorXd scale = state.scale();
  const VectorXd excess = state.log_df_excess.array().exp();
  const VectorXd& nj = data.gram_diag();
  const double inv_samples = 1.0 / static_cast<double>(samples);

  MarginalGradient g;
  g.mu_tilde = -(data.X().transpose() * (data.Y() - data.X() * state.mu_tilde)) / s2;
  g.log_scale.resize(data.p());
  g.log_df_excess.resize(data.p());

  VectorXd cross(samples);
  for (Index j = 0; j < data.p(); ++j) {
    const double nu = 2.0 + excess[j];
    const double variance = scale[j] * scale[j] * nu / excess[j];
    g.log_scale[j] = nj[j] * variance / s2 - 1.0;
    const double d_variance_d_nu = -2.0 * scale[j] * scale[j] / (excess[j] * excess[j]);
    double d_nu = nj[j] * d_variance_d_nu / (2.0 * s2) - entropy_derivative(nu);

    double d_mu = 0.0;
    double d_log_scale = 0.0;
    for (Index s = 0; s < samples; ++s) {
      const double t = standard_draws(s, j);
      const double beta = state.mu_tilde[j] + scale[j] * t;
      const double slope = prior.d_log_density(beta);
      d_mu -= slope;
      d_log_scale -= slope * scale[j] * t;
      cross[s] = -prior.log_density(beta);
    }
    g.mu_tilde[j] += d_mu * inv_samples;
    g.log_scale[j] += d_log_scale * inv_samples;

    const double half_digamma_gap = 0.5 * (special::digamma(0.5 * (nu + 1.0)) - special::digamma(0.5 * nu));
    const double cross_sum = cross.sum();
    double score_term = 0.0;
    for (Index s = 0; s < samples; ++s) {
      const double t2 = standard_draws(s, j) * standard_draws(s, j);
      const double score =
          half_digamma_gap - 0.5 / nu - 0.5 * std::log1p(t2 / nu) + 0.5 * (nu + 1.0) * t2 / (nu * (nu + t2));
      const double baseline = (cross_sum - cross[s]) / static_cast<double>(samples - 1);
      score_term += (cross[s] - baseline) * score;
    }
    d_nu += score_term * inv_samples;
    g.log_df_excess[j] = d_nu * excess[j];
  }
  return g;
}

void adam_step(AdamMoments& moments, const VectorXd& grad, const AdamOptions& options, VectorXd& params) {
  moments.first = options.beta1 * moments.first + (1.0 - options.beta1) * grad;
  moments.second = options.beta2 * moments.second + (1.0 - options.beta2) * grad.cwiseAbs2();
  moments.beta1_power *= options.beta1;
  moments.beta2_power *= options.beta2;
  params.array() -= options.learning_rate * (moments.first / (1.0 - moments.beta1_power)).array() /
                    ((moments.second / (1.0 - moments.beta2_power)).array().sqrt() + options.epsilon);
}

MarginalState fit_marginal_from(const Dataset& data, const Hyperparameters& hyper, MarginalState state,
                                const AdamOptions& options, Rng& rng) {
  check_shapes(state, data);
  if (options.steps < 1) throw DomainError("fit_marginal: steps must be >= 1");
  if (options.samples_per_step < 2) throw DomainError("fit_marginal: samples_per_step must be >= 2");
  const Index p = data.p();

  AdamMoments moments(3 * p);
  VectorXd params(3 * p);
  params << state.mu_tilde, state.log_scale, state.log_df_excess;
  VectorXd grad(3 * p);

  const double initial = mc_negative_elbo_marginal(state, data, hyper, options.samples_per_step, rng).value;
  int above_limit = 0;
  for (int step = 1; step <= options.steps; ++step) {
    const MatrixXd draws = draw_standard_t(state.df(), options.samples_per_step, rng);
    const double objective = marginal_objective(state, data, hyper, draws).value;
    if (objective > initial + 9.0 * std::abs(initial)) {
      if (++above_limit >= 50) {
        throw NumericError("fit_marginal: objective above 10x its initial value for 50 steps (step " +
                           std::to_string(step) + ")");
      }
    } else {
      above_limit = 0;
    }

    const MarginalGradient g = marginal_gradient(state, data, hyper, draws);
    grad << g.mu_tilde, g.log_scale, g.log_df_excess;
    if (!grad.allFinite()) throw NumericError("fit_marginal: non-finite gradient at step " + std::to_string(step));

    adam_step(moments, grad, options, params);
    state.mu_tilde = params.segment(0, p);
    state.log_scale = params.segment(p, p);
    state.log_df_excess = params.segment(2 * p, p);
  }
  return state;
}

MarginalState fit_marginal(const Dataset& data, const Hyperparameters& hyper, const VectorXd& init_mu,
                           const AdamOptions& options, Rng& rng) {
  if (init_mu.size() != data.p()) throw InputError("fit_marginal: init_mu has the wrong length");
  MarginalState init;
  init.mu_tilde = init_mu;
  const double shape = hyper.a0 + 0.5;
  init.log_scale = 0.5 * ((init_mu.array().square() + hyper.bn) / shape).log();
  init.log_df_excess = VectorXd::Constant(data.p(), std::log(2.0 * shape - 2.0));
  return fit_marginal_from(data, hyper, std::move(init), options, rng);
}

KlComparison compare_joint_marginal(std::uint64_t seed, std::uint64_t replication, const AdamOptions& options) {
  harness::ExperimentSpec spec = harness::experiment_spec("toyC");
  spec.seed = seed;
  const harness::Replicate rep = harness::generate(spec, replication);
  const Dataset& data = rep.data;

  Hyperparameters hyper = vb::default_hyperparameters(data.n(), data.p(), vb::ScalePreset::JointMarginalComparison);
  hyper.sigma = spec.sigma;
  hyper.noise_mode = NoiseMode::Known;
  hyper.blocks = spec.vb_blocks;

  const VectorXd init = harness::cv_lasso(data).beta;
  const FitResult joint = vb::fit(data, hyper, init);
  Rng rng = make_rng(seed, Stream::MarginalKl, replication);
  const MarginalState marginal = fit_marginal(data, hyper, init, options, rng);

  KlComparison out;
  double sum_signal = 0.0;
  double sum_null = 0.0;
  Index count_signal = 0;
  for (Index j = 0; j < data.p(); ++j) {
    const double diff = joint.state.mu[j] - marginal.mu_tilde[j];
    if (rep.beta[j] != 0.0) {
      sum_signal += diff * diff;
      ++count_signal;
    } else {
      sum_null += diff * diff;
    }
  }
  out.mse_nonzero = count_signal > 0 ? sum_signal / static_cast<double>(count_signal) : 0.0;
  out.mse_zero = count_signal < data.p() ? sum_null / static_cast<double>(data.p() - count_signal) : 0.0;
  out.vb_iterations = joint.iterations;
  Rng eval_rng = make_rng(seed, Stream::MarginalKl, replication + (1ULL << 40));
  out.marginal_objective_at_end = mc_negative_elbo_marginal(marginal, data, hyper, 64, eval_rng).value;
  return out;
}

}  // namespace tshrink::marginal
