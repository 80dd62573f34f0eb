#pragma once

#include <vector>

#include "tshrink/model.hpp"

namespace tshrink::harness {

/// Coordinate-descent solution of  min 1/(2n) |Y - X beta|^2 + lambda |beta|_1,
/// iterated until the largest coordinate change in a sweep is below 1e-7.
/// Throws SolverError after 10^4 sweeps, DomainError for lambda < 0.
VectorXd lasso_init(const Dataset& data, double lambda_reg);
VectorXd lasso_init(const Dataset& data, double lambda_reg, const VectorXd& warm_start);

/// sd(Y) * sqrt(2 ln p / n).
double default_lasso_lambda(const Dataset& data);

struct ScaledLasso {
  VectorXd beta;
  double sigma = 0.0;   // residual-based noise estimate at the fixed point
  double lambda = 0.0;  // final penalty sigma * sqrt(2 ln p / n)
};

/// Lasso with the penalty tied to a jointly estimated noise level: alternate
/// beta = lasso(sigma * sqrt(2 ln p / n)) and sigma = |Y - X beta| / sqrt(n),
/// starting from sigma = sd(Y), until sigma changes by less than 1e-6 relative.
ScaledLasso scaled_lasso(const Dataset& data);

struct CvLassoOptions {
  int folds = 10;
  int path_length = 100;
  /// Smallest penalty as a fraction of the smallest all-zero penalty;
  /// <= 0 picks 0.01 when n < p and 1e-4 otherwise.
  double min_ratio = 0.0;
};

struct CvLasso {
  VectorXd beta;          // full-data fit at the selected penalty
  double lambda = 0.0;    // penalty minimizing cross-validated squared error
  double sigma = 0.0;     // sqrt(RSS / max(1, n - |support|)) at the selected fit
  std::vector<double> path;
  std::vector<double> cv_error;
};

/// K-fold cross-validated Lasso over a log-spaced penalty path with warm
/// starts. Folds are assigned round-robin by row index.
CvLasso cv_lasso(const Dataset& data, const CvLassoOptions& options = {});

}  // namespace tshrink::harness
