#include "tshrink/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tshrink/error.hpp"

namespace tshrink::harness {
namespace {

constexpr double kLassoTol = 1e-7;
constexpr int kLassoMaxSweeps = 10000;

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

double response_sd(const Dataset& data) {
  const double n = static_cast<double>(data.n());
  if (data.n() < 2) return std::sqrt(data.yty() / n);
  const double mean = data.Y().mean();
  return std::sqrt((data.Y().array() - mean).square().sum() / (n - 1.0));
}

// Returns the largest weighted move  w_j * |delta beta_j|^power.
double sweep(const MatrixXd& X, VectorXd& residual, const VectorXd& scaled_norm, double lambda_reg, VectorXd& beta,
             const std::vector<Index>* subset, bool weighted) {
  const double n = static_cast<double>(X.rows());
  const Index count = subset ? static_cast<Index>(subset->size()) : X.cols();
  double max_change = 0.0;
  for (Index k = 0; k < count; ++k) {
    const Index j = subset ? (*subset)[static_cast<std::size_t>(k)] : k;
    if (scaled_norm[j] <= 0.0) continue;
    const double old = beta[j];
    const double z = X.col(j).dot(residual) / n + scaled_norm[j] * old;
    const double updated = soft_threshold(z, lambda_reg) / scaled_norm[j];
    if (updated != old) {
      residual.noalias() -= (updated - old) * X.col(j);
      beta[j] = updated;
      const double delta = updated - old;
      max_change = std::max(max_change, weighted ? scaled_norm[j] * delta * delta : std::abs(delta));
    }
  }
  return max_change;
}

struct Stopping {
  double tol = kLassoTol;
  bool weighted = false;  // compare n_j/n * delta^2 instead of |delta|
};

// Full sweeps interleaved with passes over the current nonzero set until a
// full sweep moves nothing by more than the tolerance.
void descend(const MatrixXd& X, const VectorXd& Y, const VectorXd& scaled_norm, double lambda_reg, VectorXd& beta,
             Stopping stop = {}) {
  VectorXd residual = Y - X * beta;
  std::vector<Index> active;
  int sweeps = 0;
  while (true) {
    if (sweeps++ >= kLassoMaxSweeps) {
      throw SolverError("lasso: no convergence after " + std::to_string(kLassoMaxSweeps) + " sweeps");
    }
    if (sweep(X, residual, scaled_norm, lambda_reg, beta, nullptr, stop.weighted) < stop.tol) return;
    active.clear();
    for (Index j = 0; j < beta.size(); ++j) {
      if (beta[j] != 0.0) active.push_back(j);
    }
    while (sweep(X, residual, scaled_norm, lambda_reg, beta, &active, stop.weighted) >= stop.tol) {
      if (sweeps++ >= kLassoMaxSweeps) {
        throw SolverError("lasso: no convergence after " + std::to_string(kLassoMaxSweeps) + " sweeps");
      }
    }
  }
}

}  // namespace

VectorXd lasso_init(const Dataset& data, double lambda_reg) {
  return lasso_init(data, lambda_reg, VectorXd::Zero(data.p()));
}

VectorXd lasso_init(const Dataset& data, double lambda_reg, const VectorXd& warm_start) {
  if (!(lambda_reg >= 0.0) || !std::isfinite(lambda_reg)) throw DomainError("lasso: lambda must be finite and >= 0");
  if (warm_start.size() != data.p()) throw InputError("lasso: warm start has the wrong length");
  VectorXd beta = warm_start;
  descend(data.X(), data.Y(), data.gram_diag() / static_cast<double>(data.n()), lambda_reg, beta);
  return beta;
}

double default_lasso_lambda(const Dataset& data) {
  return response_sd(data) * std::sqrt(2.0 * std::log(static_cast<double>(data.p())) / static_cast<double>(data.n()));
}

ScaledLasso scaled_lasso(const Dataset& data) {
  const double n = static_cast<double>(data.n());
  const double base = std::sqrt(2.0 * std::log(static_cast<double>(data.p())) / n);
  ScaledLasso out;
  out.sigma = std::max(response_sd(data), 1e-8);
  out.beta = VectorXd::Zero(data.p());
  for (int iter = 0; iter < 100; ++iter) {
    out.lambda = out.sigma * base;
    out.beta = lasso_init(data, out.lambda, out.beta);
    const double updated = std::max((data.Y() - data.X() * out.beta).norm() / std::sqrt(n), 1e-8);
    const bool done = std::abs(updated - out.sigma) < 1e-6 * out.sigma;
    out.sigma = updated;
    if (done) break;
  }
  out.lambda = out.sigma * base;
  return out;
}

CvLasso cv_lasso(const Dataset& data, const CvLassoOptions& options) {
  if (options.folds < 2 || options.folds > data.n()) throw ConfigError("cv_lasso: folds must be in [2, n]");
  if (options.path_length < 2) throw ConfigError("cv_lasso: path_length must be >= 2");
  const Index n = data.n();
  const Index p = data.p();
  const double nd = static_cast<double>(n);
  const double ratio = options.min_ratio > 0.0 ? options.min_ratio : (n < p ? 0.01 : 1e-4);
  if (!(ratio < 1.0)) throw ConfigError("cv_lasso: min_ratio must be < 1");

  const double lambda_max = data.xty().cwiseAbs().maxCoeff() / nd;
  CvLasso out;
  out.path.resize(static_cast<std::size_t>(options.path_length));
  for (int k = 0; k < options.path_length; ++k) {
    const double frac = static_cast<double>(k) / static_cast<double>(options.path_length - 1);
    out.path[static_cast<std::size_t>(k)] = lambda_max * std::pow(ratio, frac);
  }
  out.cv_error.assign(out.path.size(), 0.0);
  if (lambda_max <= 0.0) {
    out.beta = VectorXd::Zero(p);
    out.lambda = 0.0;
    out.sigma = std::sqrt(data.yty() / nd);
    return out;
  }

  for (int fold = 0; fold < options.folds; ++fold) {
    std::vector<Index> train;
    std::vector<Index> test;
    for (Index i = 0; i < n; ++i) (i % options.folds == fold ? test : train).push_back(i);
    const MatrixXd X_train = data.X()(train, Eigen::all);
    const VectorXd Y_train = data.Y()(train);
    const MatrixXd X_test = data.X()(test, Eigen::all);
    const VectorXd Y_test = data.Y()(test);
    const VectorXd scaled_norm = X_train.colwise().squaredNorm().transpose() / static_cast<double>(train.size());
    const Stopping stop{kLassoTol * Y_train.squaredNorm() / static_cast<double>(train.size()), true};
    const double null_rss = Y_train.squaredNorm();
    VectorXd beta = VectorXd::Zero(p);
    bool saturated = false;
    for (std::size_t k = 0; k < out.path.size(); ++k) {
      // Past near-interpolation the path is frozen at the last fit.
      if (!saturated) {
        descend(X_train, Y_train, scaled_norm, out.path[k], beta, stop);
        saturated = (Y_train - X_train * beta).squaredNorm() < 1e-3 * null_rss;
      }
      out.cv_error[k] += (Y_test - X_test * beta).squaredNorm() / nd;
    }
  }

  const auto best = std::min_element(out.cv_error.begin(), out.cv_error.end()) - out.cv_error.begin();
  out.lambda = out.path[static_cast<std::size_t>(best)];
  const VectorXd scaled_norm = data.gram_diag() / nd;
  out.beta = VectorXd::Zero(p);
  for (std::ptrdiff_t k = 0; k <= best; ++k) {
    descend(data.X(), data.Y(), scaled_norm, out.path[static_cast<std::size_t>(k)], out.beta);
  }
  const double support = static_cast<double>((out.beta.array() != 0.0).count());
  const double dof = std::max(1.0, nd - support);
  out.sigma = std::max((data.Y() - data.X() * out.beta).norm() / std::sqrt(dof), 1e-8);
  return out;
}

}  // namespace tshrink::harness
