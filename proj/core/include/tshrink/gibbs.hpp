#pragma once

#include <cstdint>
#include <vector>

#include "tshrink/model.hpp"
#include "tshrink/posterior.hpp"
#include "tshrink/rng.hpp"

namespace tshrink::gibbs {

struct GibbsConfig {
  int iterations = 1000;
  int burn_in = 200;
  Index blocks = 1;
  std::uint64_t seed = 0;

  /// 0 <= burn_in < iterations, 1 <= blocks <= p; throws ConfigError.
  void validate(Index p) const;
};

struct GibbsChain {
  MatrixXd beta_samples;  // (iterations - burn_in) x p, post burn-in draws
  VectorXd lambda_last;
  double wall_time = 0.0;

  VectorXd mean() const;
  /// Equal-tailed empirical intervals (linear interpolation of order statistics).
  std::vector<posterior::Interval> intervals(double level) const;
};

/// lambda_j | beta_j ~ Gamma(shape a0 + 1/2, rate bn + beta_j^2 / 2), independently.
VectorXd sample_lambda(const VectorXd& beta, const Hyperparameters& hyper, Rng& rng);

/// One Gauss-Seidel pass of exact block draws
///   beta_(k) | rest ~ N(m_(k), sigma^2 (X_(k)^T X_(k) + sigma^2 Lambda_(k))^{-1})
/// with sigma = hyper.sigma, starting from `beta`.
VectorXd sample_beta_blocks(const VectorXd& lambda, const VectorXd& beta, const Dataset& data,
                            const Hyperparameters& hyper, Index blocks, Rng& rng);

/// Alternates lambda and beta draws for config.iterations steps from
/// beta_init and keeps the draws after burn-in. Noise sigma is treated as
/// known (hyper.sigma). Deterministic in config.seed.
GibbsChain gibbs_fit(const Dataset& data, const Hyperparameters& hyper, const GibbsConfig& config,
                     const VectorXd& beta_init);

/// Effective sample size of a scalar chain (Geyer initial positive sequence).
double effective_sample_size(const VectorXd& draws);

}  // namespace tshrink::gibbs
