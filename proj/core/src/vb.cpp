#include "tshrink/vb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "tshrink/block_solver.hpp"
#include "tshrink/error.hpp"
#include "tshrink/special_functions.hpp"

namespace tshrink::vb {
namespace {

void require_finite(double value, const char* term) {
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << "negative_elbo: term '" << term << "' is not finite (" << value << ")";
    throw NumericError(msg.str());
  }
}

void check_index(Index j, const VariationalState& state) {
  if (j < 0 || j >= state.size()) throw DomainError("coordinate index " + std::to_string(j) + " out of range");
}

// Rethrows with the iteration attached, preserving the error category.
[[noreturn]] void rethrow_at(int iteration, const Error& e) {
  const std::string msg = "iteration " + std::to_string(iteration) + ": " + e.what();
  if (dynamic_cast<const SolverError*>(&e)) throw SolverError(msg);
  if (dynamic_cast<const NumericError*>(&e)) throw NumericError(msg);
  if (dynamic_cast<const DomainError*>(&e)) throw DomainError(msg);
  throw Error(msg);
}

}  // namespace

double negative_elbo(const VariationalState& state, const Dataset& data, const Hyperparameters& hyper) {
  const double n = static_cast<double>(data.n());
  const double s2 = state.sigma * state.sigma;
  const VectorXd& nj = data.gram_diag();

  const double constant = n * std::log(state.sigma) + 0.5 * n * std::log(2.0 * std::numbers::pi);
  require_finite(constant, "n log sigma");

  const double fit_term = (data.Y() - data.X() * state.mu).squaredNorm() / (2.0 * s2);
  require_finite(fit_term, "residual sum of squares");

  const VectorXd inv_lambda = state.b.array() / (state.a.array() - 1.0);
  const double variance_term = nj.dot(inv_lambda) / (2.0 * s2);
  require_finite(variance_term, "sum n_j b_j / (a_j - 1)");

  const VectorXd lambda = state.a.cwiseQuotient(state.b);
  const double shrink_term = (0.5 * state.mu.array().square() + hyper.bn).matrix().dot(lambda);
  require_finite(shrink_term, "sum (mu_j^2/2 + bn) a_j / b_j");

  const double log_gamma_a0 = special::log_gamma(hyper.a0);
  double gamma_kl = 0.0;
  for (Index j = 0; j < state.size(); ++j) {
    const double aj = state.a[j];
    gamma_kl += hyper.a0 * std::log(state.b[j] / hyper.bn) - special::log_gamma(aj) + log_gamma_a0 +
                (aj - hyper.a0) * special::digamma(aj) - aj;
  }
  require_finite(gamma_kl, "Gamma KL terms");

  return constant + fit_term + variance_term + shrink_term + gamma_kl;
}

ElboGradient elbo_gradient(const VariationalState& state, const Dataset& data, const Hyperparameters& hyper) {
  const double s2 = state.sigma * state.sigma;
  const VectorXd& nj = data.gram_diag();
  const VectorXd residual = data.Y() - data.X() * state.mu;

  ElboGradient g;
  const VectorXd lambda = state.a.cwiseQuotient(state.b);
  g.mu = -(data.X().transpose() * residual) / s2 + lambda.cwiseProduct(state.mu);

  const Index p = state.size();
  g.a.resize(p);
  g.b.resize(p);
  double variance_sum = 0.0;
  for (Index j = 0; j < p; ++j) {
    const double aj = state.a[j];
    const double bj = state.b[j];
    const double c = 0.5 * state.mu[j] * state.mu[j] + hyper.bn;
    g.a[j] = -nj[j] / (2.0 * s2) * bj / ((aj - 1.0) * (aj - 1.0)) + c / bj +
             (aj - hyper.a0) * special::trigamma(aj) - 1.0;
    g.b[j] = nj[j] / (2.0 * s2 * (aj - 1.0)) - c * aj / (bj * bj) + hyper.a0 / bj;
    variance_sum += nj[j] * bj / (aj - 1.0);
  }
  const double n = static_cast<double>(data.n());
  g.sigma = n / state.sigma - (residual.squaredNorm() + variance_sum) / (s2 * state.sigma);
  return g;
}

VectorXd update_mu(const VariationalState& state, const Dataset& data, const Hyperparameters& hyper) {
  const BlockSolver solver(data, hyper.blocks);
  const VectorXd penalty = state.sigma * state.sigma * state.a.cwiseQuotient(state.b);
  VectorXd mu = state.mu;
  solver.sweep_mean(penalty, mu);
  return mu;
}

double shape_objective(Index j, double shape, const VariationalState& state, const Dataset& data,
                       const Hyperparameters& hyper) {
  check_index(j, state);
  const double s2 = state.sigma * state.sigma;
  const double bj = state.b[j];
  const double c = 0.5 * state.mu[j] * state.mu[j] + hyper.bn;
  return data.gram_diag()[j] * bj / (2.0 * s2 * (shape - 1.0)) + c * shape / bj - special::log_gamma(shape) +
         (shape - hyper.a0) * special::digamma(shape) - shape;
}

double shape_equation(Index j, double shape, const VariationalState& state, const Dataset& data,
                      const Hyperparameters& hyper) {
  check_index(j, state);
  const double s2 = state.sigma * state.sigma;
  const double bj = state.b[j];
  const double c = 0.5 * state.mu[j] * state.mu[j] + hyper.bn;
  const double am1 = shape - 1.0;
  return -data.gram_diag()[j] / (2.0 * s2) * bj / (am1 * am1) + c / bj +
         (shape - hyper.a0) * special::trigamma(shape) - 1.0;
}

double update_shape(Index j, const VariationalState& state, const Dataset& data, const Hyperparameters& hyper) {
  check_index(j, state);
  if (!(state.b[j] > 0.0) || !std::isfinite(state.mu[j])) {
    throw DomainError("update_shape: requires b_j > 0 and finite mu_j at coordinate " + std::to_string(j));
  }
  auto g = [&](double a) { return shape_equation(j, a, state, data, hyper); };

  double lo = 1.0 + kShapeFloor;
  double g_lo = g(lo);
  double candidate;
  if (g_lo >= 0.0) {
    // Objective already increasing at the left end of the bracket.
    candidate = lo;
  } else {
    double hi = std::max(2.0 * hyper.a0, 4.0);
    double g_hi = g(hi);
    int doublings = 0;
    while (!(g_hi > 0.0)) {
      if (++doublings > 60) {
        std::ostringstream msg;
        msg << "update_shape: no sign change for coordinate " << j << " (g(" << lo << ") = " << g_lo << ", g("
            << hi << ") = " << g_hi << ")";
        throw SolverError(msg.str());
      }
      lo = hi;
      g_lo = g_hi;
      hi *= 2.0;
      g_hi = g(hi);
    }
    // Between outer iterations the root moves little, so probing next to the
    // current shape usually shrinks the bracket to a tiny interval at once.
    const double current = state.a[j];
    if (current > lo && current < hi) {
      const double step = 1e-4 * (1.0 + current);
      const double g_current = g(current);
      if (g_current > 0.0) {
        hi = current;
        g_hi = g_current;
        const double probe = current - step;
        if (probe > lo) {
          const double g_probe = g(probe);
          (g_probe > 0.0 ? hi : lo) = probe;
          (g_probe > 0.0 ? g_hi : g_lo) = g_probe;
        }
      } else {
        lo = current;
        g_lo = g_current;
        const double probe = current + step;
        if (probe < hi) {
          const double g_probe = g(probe);
          (g_probe > 0.0 ? hi : lo) = probe;
          (g_probe > 0.0 ? g_hi : g_lo) = g_probe;
        }
      }
    }
    // Illinois false position inside the bracket, with a bisection step
    // whenever the bracket fails to halve.
    int side = 0;
    double mid = 0.5 * (lo + hi);
    while (hi - lo >= 1e-10 * (1.0 + mid)) {
      const double width = hi - lo;
      double trial = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
      if (!(trial > lo && trial < hi)) trial = 0.5 * (lo + hi);
      const double g_trial = g(trial);
      if (g_trial > 0.0) {
        hi = trial;
        g_hi = g_trial;
        if (side == 1) g_lo *= 0.5;
        side = 1;
      } else {
        lo = trial;
        g_lo = g_trial;
        if (side == -1) g_hi *= 0.5;
        side = -1;
      }
      if (hi - lo > 0.5 * width) {
        const double half = 0.5 * (lo + hi);
        const double g_half = g(half);
        if (g_half > 0.0) {
          hi = half;
          g_hi = g_half;
        } else {
          lo = half;
          g_lo = g_half;
        }
        side = 0;
      }
      const double next = lo - g_lo * (hi - lo) / (g_hi - g_lo);
      const double clamped = (next > lo && next < hi) ? next : 0.5 * (lo + hi);
      if (clamped == mid) break;
      mid = clamped;
    }
    candidate = mid;
  }

  const double current = state.a[j];
  if (current > 1.0 && std::isfinite(current) &&
      shape_objective(j, candidate, state, data, hyper) > shape_objective(j, current, state, data, hyper)) {
    return current;
  }
  return candidate;
}

double update_rate(Index j, const VariationalState& state, const Dataset& data, const Hyperparameters& hyper) {
  check_index(j, state);
  const double aj = state.a[j];
  if (!(aj > 1.0)) throw DomainError("update_rate: requires a_j > 1 at coordinate " + std::to_string(j));
  const double s2 = state.sigma * state.sigma;
  const double quad = data.gram_diag()[j] / (2.0 * s2 * (aj - 1.0));
  const double c = (0.5 * state.mu[j] * state.mu[j] + hyper.bn) * aj;
  // Positive root of quad b^2 + a0 b - c, in the cancellation-free form.
  return 2.0 * c / (hyper.a0 + std::sqrt(hyper.a0 * hyper.a0 + 4.0 * quad * c));
}

double update_noise_eb(const VariationalState& state, const Dataset& data) {
  const double rss = (data.Y() - data.X() * state.mu).squaredNorm();
  const double variance = data.gram_diag().dot((state.b.array() / (state.a.array() - 1.0)).matrix());
  const double sigma = std::sqrt((rss + variance) / static_cast<double>(data.n()));
  if (std::isnan(sigma)) throw NumericError("update_noise_eb: non-finite noise estimate");
  return std::max(sigma, kSigmaFloor);
}

double default_rate(Index n, Index p, double a0, ScalePreset preset) {
  if (n < 1 || p < 1) throw ConfigError("default_hyperparameters: n and p must be >= 1");
  if (!(a0 > 1.0) || !std::isfinite(a0)) throw ConfigError("default_hyperparameters: a0 must be > 1");
  const double dn = static_cast<double>(n);
  const double dp = static_cast<double>(p);
  const double m = std::max(dn, dp);
  double log_ratio;  // log(bn / a0)
  if (preset == ScalePreset::Default) {
    if (m <= 1.0) throw ConfigError("default_hyperparameters: log(max(p, n)) = 0 gives bn = 0");
    log_ratio = std::log(std::log(m)) - std::log(dn) - (2.0 + 1.0 / a0) * std::log(dp) - std::log(m) / a0;
  } else {
    if (dp <= 1.0) throw ConfigError("default_hyperparameters: log(p) = 0 gives bn = 0");
    log_ratio = std::log(std::log(dp)) - std::log(dn) - (2.0 + 1.0 / a0) * std::log(dp) - 6.0 * std::log(dp) / a0;
  }
  const double bn = a0 * std::exp(log_ratio);
  if (!(bn > 0.0) || !std::isfinite(bn)) throw ConfigError("default_hyperparameters: bn underflowed");
  return bn;
}

Hyperparameters default_hyperparameters(Index n, Index p, ScalePreset preset) {
  Hyperparameters h;
  h.a0 = 2.0;
  h.bn = default_rate(n, p, h.a0, preset);
  h.sigma = 1.0;
  h.noise_mode = NoiseMode::Known;
  h.tol = 1e-7;
  h.max_iters = 500;
  h.blocks = p <= 500 ? 1 : (p + 99) / 100;
  return h;
}

VariationalState initialize_state(const Dataset& data, const Hyperparameters& hyper, const VectorXd& mu_init) {
  if (mu_init.size() != data.p()) {
    throw InputError("initialize_state: mu_init has length " + std::to_string(mu_init.size()) + ", expected " +
                     std::to_string(data.p()));
  }
  if (!mu_init.allFinite()) throw InputError("initialize_state: mu_init has non-finite entries");
  VariationalState state;
  state.mu = mu_init;
  state.a = VectorXd::Constant(data.p(), hyper.a0 + 0.5);
  state.b = mu_init.array().square() + hyper.bn;
  if (hyper.noise_mode == NoiseMode::Known) {
    state.sigma = hyper.sigma;
  } else {
    const double rms = std::sqrt((data.Y() - data.X() * mu_init).squaredNorm() / static_cast<double>(data.n()));
    state.sigma = std::max(rms, kSigmaFloor);
  }
  return state;
}

FitResult fit(const Dataset& data, const Hyperparameters& hyper, const VectorXd& mu_init) {
  hyper.validate(data.p());
  return fit_from(data, hyper, initialize_state(data, hyper, mu_init));
}

FitResult fit_from(const Dataset& data, const Hyperparameters& hyper, VariationalState state) {
  hyper.validate(data.p());
  if (state.size() != data.p()) throw InputError("fit: state dimension does not match the data");
  state.check_invariants();
  const auto start = std::chrono::steady_clock::now();

  const BlockSolver solver(data, hyper.blocks);
  FitResult result;
  double previous = negative_elbo(state, data, hyper);
  int iteration = 0;
  try {
    for (iteration = 1; iteration <= hyper.max_iters; ++iteration) {
      const VectorXd penalty = state.sigma * state.sigma * state.a.cwiseQuotient(state.b);
      solver.sweep_mean(penalty, state.mu);
      for (Index j = 0; j < data.p(); ++j) {
        state.a[j] = update_shape(j, state, data, hyper);
        state.b[j] = update_rate(j, state, data, hyper);
      }
      if (hyper.noise_mode == NoiseMode::EmpiricalBayes) state.sigma = update_noise_eb(state, data);

      const double omega = negative_elbo(state, data, hyper);
      result.elbo_trace.push_back(omega);
      if (std::abs(omega - previous) < hyper.tol * (1.0 + std::abs(omega))) {
        result.converged = true;
        break;
      }
      previous = omega;
    }
  } catch (const Error& e) {
    rethrow_at(iteration, e);
  }
  state.check_invariants();
  result.iterations = static_cast<int>(result.elbo_trace.size());
  result.state = std::move(state);
  result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace tshrink::vb
