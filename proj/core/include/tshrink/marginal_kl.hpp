#pragma once

#include <cstdint>

#include "tshrink/model.hpp"
#include "tshrink/rng.hpp"

namespace tshrink::marginal {

/// Independent Student-t factors q(beta_j) = t(nu_j, location mu_tilde_j,
/// scale s_j), stored in unconstrained coordinates (mu_tilde, ln s, ln(nu - 2)).
struct MarginalState {
  VectorXd mu_tilde;
  VectorXd log_scale;
  VectorXd log_df_excess;

  Index size() const { return mu_tilde.size(); }
  VectorXd scale() const { return log_scale.array().exp(); }
  VectorXd df() const { return log_df_excess.array().exp() + 2.0; }
};

/// The marginal implied by a joint state: (mu_j, sqrt(b_j / a_j), 2 a_j).
MarginalState from_joint(const VariationalState& state);

/// Standard-t draws, one row per sample: n_samples x p with column j at nu_j.
MatrixXd draw_standard_t(const VectorXd& df, Index n_samples, Rng& rng);

struct Estimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// -E_q log p(Y | beta) in closed form (E[beta_j] = mu_tilde_j,
/// Var[beta_j] = s_j^2 nu_j / (nu_j - 2)); sigma is hyper.sigma.
double expected_neg_loglik(const MarginalState& state, const Dataset& data, const Hyperparameters& hyper);

/// Monte-Carlo negative ELBO of the marginal family: closed-form expected
/// negative log-likelihood plus the sample mean of log q(beta) - log pi(beta)
/// at beta_j = mu_tilde_j + s_j T_j. The prior is the Student-t with 2 a0
/// d.f. and scale sqrt(bn / a0).
Estimate mc_negative_elbo_marginal(const MarginalState& state, const Dataset& data, const Hyperparameters& hyper,
                                   Index n_samples, Rng& rng);

/// Same estimate from caller-supplied standardized draws (common random numbers).
Estimate marginal_objective(const MarginalState& state, const Dataset& data, const Hyperparameters& hyper,
                            const MatrixXd& standard_draws);

struct MarginalGradient {
  VectorXd mu_tilde;
  VectorXd log_scale;
  VectorXd log_df_excess;
};

/// Unbiased gradient estimate from the given draws. Location and scale use
/// the pathwise (reparameterized) derivative; the d.f. coordinate combines the
/// analytic entropy derivative with a score-function term on the prior
/// cross-entropy, using a leave-one-out baseline (needs >= 2 draws).
MarginalGradient marginal_gradient(const MarginalState& state, const Dataset& data, const Hyperparameters& hyper,
                                   const MatrixXd& standard_draws);

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int steps = 10000;
  Index samples_per_step = 4;
};

/// First and second moment accumulators of one Adam run.
struct AdamMoments {
  VectorXd first;
  VectorXd second;
  double beta1_power = 1.0;
  double beta2_power = 1.0;

  explicit AdamMoments(Index size) : first(VectorXd::Zero(size)), second(VectorXd::Zero(size)) {}
};

/// One bias-corrected Adam step: params -= lr * m_hat / (sqrt(v_hat) + eps).
void adam_step(AdamMoments& moments, const VectorXd& grad, const AdamOptions& options, VectorXd& params);

/// Adam on the marginal objective from an explicit starting point. Throws
/// NumericError when the objective exceeds 10x its initial value for 50
/// consecutive steps or turns non-finite.
MarginalState fit_marginal_from(const Dataset& data, const Hyperparameters& hyper, MarginalState init,
                                const AdamOptions& options, Rng& rng);

/// Starts from mu_tilde = init_mu and the scale/d.f. implied by the joint
/// initialization (a_j = a0 + 1/2, b_j = bn + mu_j^2).
MarginalState fit_marginal(const Dataset& data, const Hyperparameters& hyper, const VectorXd& init_mu,
                           const AdamOptions& options, Rng& rng);

struct KlComparison {
  double mse_nonzero = 0.0;
  double mse_zero = 0.0;
  int vb_iterations = 0;
  double marginal_objective_at_end = 0.0;
};

/// Toy joint-vs-marginal comparison: n = p = 100, beta0 = (10 x5, 0, ...),
/// sigma = 1 known, comparison bn preset, both fits from the same Lasso start.
/// Returns MSE(mu, mu_tilde) over the support and over its complement.
KlComparison compare_joint_marginal(std::uint64_t seed, std::uint64_t replication = 0,
                                    const AdamOptions& options = {});

}  // namespace tshrink::marginal
