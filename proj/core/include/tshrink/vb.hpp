#pragma once

#include "tshrink/model.hpp"

namespace tshrink::vb {

/// Lower bound on sigma under empirical-Bayes noise updates.
inline constexpr double kSigmaFloor = 1e-8;
/// Left end of the shape bracket: roots are searched on [1 + kShapeFloor, ...).
inline constexpr double kShapeFloor = 1e-6;

/// Negative ELBO of the joint (beta, lambda) variational family:
///
///   n ln s + (n/2) ln 2pi + |Y - X mu|^2 / (2 s^2)
///   + (1 / 2 s^2) sum_j n_j b_j / (a_j - 1)
///   + sum_j (mu_j^2 / 2 + bn) a_j / b_j
///   + sum_j [a0 ln(b_j / bn) - ln Gamma(a_j) + ln Gamma(a0) + (a_j - a0) psi(a_j) - a_j]
///
/// with s = state.sigma. The likelihood constant is kept so values stay
/// comparable across noise updates. Throws NumericError naming the term if
/// any group is non-finite.
double negative_elbo(const VariationalState& state, const Dataset& data, const Hyperparameters& hyper);

struct ElboGradient {
  VectorXd mu;
  VectorXd a;
  VectorXd b;
  double sigma = 0.0;
};

/// Analytic partial derivatives of negative_elbo.
ElboGradient elbo_gradient(const VariationalState& state, const Dataset& data, const Hyperparameters& hyper);

/// Exact minimizer over mu when blocks == 1, otherwise one Gauss-Seidel sweep
/// over hyper.blocks contiguous blocks starting from state.mu.
VectorXd update_mu(const VariationalState& state, const Dataset& data, const Hyperparameters& hyper);

/// The terms of negative_elbo that depend on a_j, evaluated at a_j = shape.
double shape_objective(Index j, double shape, const VariationalState& state, const Dataset& data,
                       const Hyperparameters& hyper);

/// d(negative_elbo)/d a_j at a_j = shape:
///   -(n_j / 2 s^2) b_j / (a - 1)^2 + (mu_j^2 / 2 + bn) / b_j + (a - a0) psi_1(a) - 1
double shape_equation(Index j, double shape, const VariationalState& state, const Dataset& data,
                      const Hyperparameters& hyper);

/// Root of shape_equation on a bisection bracket (false-position steps with a
/// bisection fallback, stopping at width 1e-10 (1 + a)). The current a_j is kept if
/// the root would raise the objective. Throws SolverError if no bracket is
/// found after 60 doublings.
double update_shape(Index j, const VariationalState& state, const Dataset& data, const Hyperparameters& hyper);

/// Positive root of (n_j / (2 s^2 (a_j - 1))) b^2 + a0 b - (mu_j^2 / 2 + bn) a_j = 0.
double update_rate(Index j, const VariationalState& state, const Dataset& data, const Hyperparameters& hyper);

/// sqrt((|Y - X mu|^2 + sum_j n_j b_j / (a_j - 1)) / n), floored at kSigmaFloor.
double update_noise_eb(const VariationalState& state, const Dataset& data);

enum class ScalePreset {
  /// bn / a0 = log(p v n) / [n p^(2 + 1/a0) (p v n)^(1/a0)]
  Default,
  /// bn / a0 = log(p) / [n p^(2 + 1/a0) p^(6/a0)]
  JointMarginalComparison,
};

/// a0 = 2, bn from the preset, tol 1e-7, max_iters 500, blocks 1 for
/// p <= 500 and ceil(p / 100) otherwise, sigma = 1 known. Throws ConfigError
/// when the preset's log term vanishes (p v n == 1, or p == 1 for the
/// comparison preset).
Hyperparameters default_hyperparameters(Index n, Index p, ScalePreset preset = ScalePreset::Default);

/// The preset's bn for an arbitrary shape a0 > 1.
double default_rate(Index n, Index p, double a0, ScalePreset preset = ScalePreset::Default);

/// mu = mu_init, a_j = a0 + 1/2, b_j = bn + mu_j^2. sigma is hyper.sigma for
/// known noise, or the floored residual RMS for empirical Bayes.
VariationalState initialize_state(const Dataset& data, const Hyperparameters& hyper, const VectorXd& mu_init);

/// Coordinate-descent fit: repeat {block sweep over mu; for each j update
/// a_j then b_j; EB sigma if enabled; evaluate the objective} until the
/// relative change falls below hyper.tol or hyper.max_iters is reached.
FitResult fit(const Dataset& data, const Hyperparameters& hyper, const VectorXd& mu_init);

/// Same loop from an explicit starting state.
FitResult fit_from(const Dataset& data, const Hyperparameters& hyper, VariationalState state);

}  // namespace tshrink::vb
