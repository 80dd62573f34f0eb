#include "tshrink/gibbs.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "tshrink/block_solver.hpp"
#include "tshrink/error.hpp"

namespace tshrink::gibbs {
namespace {

double empirical_quantile(std::vector<double>& sorted, double prob) {
  const double pos = prob * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

void GibbsConfig::validate(Index p) const {
  if (iterations < 1) throw ConfigError("gibbs: iterations must be >= 1");
  if (burn_in < 0 || burn_in >= iterations) throw ConfigError("gibbs: burn_in must lie in [0, iterations)");
  if (blocks < 1 || blocks > p) throw ConfigError("gibbs: block count must lie in [1, p]");
}

VectorXd GibbsChain::mean() const { return beta_samples.colwise().mean().transpose(); }

std::vector<posterior::Interval> GibbsChain::intervals(double level) const {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("gibbs: credible level must lie in (0, 1)");
  std::vector<posterior::Interval> out;
  out.reserve(static_cast<std::size_t>(beta_samples.cols()));
  std::vector<double> column(static_cast<std::size_t>(beta_samples.rows()));
  for (Index j = 0; j < beta_samples.cols(); ++j) {
    for (Index i = 0; i < beta_samples.rows(); ++i) column[static_cast<std::size_t>(i)] = beta_samples(i, j);
    std::sort(column.begin(), column.end());
    out.push_back({empirical_quantile(column, 0.5 * (1.0 - level)), empirical_quantile(column, 0.5 * (1.0 + level))});
  }
  return out;
}

VectorXd sample_lambda(const VectorXd& beta, const Hyperparameters& hyper, Rng& rng) {
  const double shape = hyper.a0 + 0.5;
  VectorXd lambda(beta.size());
  for (Index j = 0; j < beta.size(); ++j) {
    const double rate = hyper.bn + 0.5 * beta[j] * beta[j];
    std::gamma_distribution<double> gamma(shape, 1.0 / rate);
    lambda[j] = gamma(rng);
    // Guard against an underflowed draw; the Gamma law has no mass at 0.
    if (!(lambda[j] > 0.0)) lambda[j] = std::numeric_limits<double>::min();
  }
  return lambda;
}

VectorXd sample_beta_blocks(const VectorXd& lambda, const VectorXd& beta, const Dataset& data,
                            const Hyperparameters& hyper, Index blocks, Rng& rng) {
  const BlockSolver solver(data, blocks);
  VectorXd out = beta;
  solver.sweep_sample(hyper.sigma * hyper.sigma * lambda, hyper.sigma, out, rng);
  return out;
}

GibbsChain gibbs_fit(const Dataset& data, const Hyperparameters& hyper, const GibbsConfig& config,
                     const VectorXd& beta_init) {
  config.validate(data.p());
  if (beta_init.size() != data.p()) throw InputError("gibbs_fit: beta_init length does not match p");
  const auto start = std::chrono::steady_clock::now();

  Rng rng = make_rng(config.seed, Stream::Gibbs);
  const BlockSolver solver(data, config.blocks);
  const double s2 = hyper.sigma * hyper.sigma;

  GibbsChain chain;
  chain.beta_samples.resize(config.iterations - config.burn_in, data.p());
  VectorXd beta = beta_init;
  VectorXd lambda;
  for (int it = 0; it < config.iterations; ++it) {
    lambda = sample_lambda(beta, hyper, rng);
    try {
      solver.sweep_sample(s2 * lambda, hyper.sigma, beta, rng);
    } catch (const NumericError& e) {
      throw NumericError("gibbs iteration " + std::to_string(it + 1) + ": " + e.what());
    }
    if (it >= config.burn_in) chain.beta_samples.row(it - config.burn_in) = beta.transpose();
  }
  chain.lambda_last = std::move(lambda);
  chain.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return chain;
}

double effective_sample_size(const VectorXd& draws) {
  const Index n = draws.size();
  if (n < 4) return static_cast<double>(n);
  const VectorXd centered = draws.array() - draws.mean();
  const double var0 = centered.squaredNorm() / static_cast<double>(n);
  if (!(var0 > 0.0)) return static_cast<double>(n);
  auto autocorr = [&](Index lag) {
    return centered.head(n - lag).dot(centered.tail(n - lag)) / (static_cast<double>(n) * var0);
  };
  // Sum paired autocorrelations while the pair sums stay positive.
  double sum = 0.0;
  for (Index m = 0; 2 * m + 1 < n; ++m) {
    const double pair = (m == 0 ? 1.0 : autocorr(2 * m)) + autocorr(2 * m + 1);
    if (pair <= 0.0) break;
    sum += pair;
  }
  const double tau = std::max(2.0 * sum - 1.0, 1.0 / static_cast<double>(n));
  return std::min(static_cast<double>(n) / tau, static_cast<double>(n) * std::log10(static_cast<double>(n)));
}

}  // namespace tshrink::gibbs
