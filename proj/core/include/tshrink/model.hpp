#pragma once

#include <Eigen/Core>
#include <string_view>
#include <vector>

namespace tshrink {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Immutable regression data Y = X beta + sigma eps, with the column
/// statistics every update needs precomputed.
class Dataset {
 public:
  /// Throws InputError on empty/non-finite data, mismatched sizes, or an
  /// all-zero column.
  Dataset(MatrixXd X, VectorXd Y);

  const MatrixXd& X() const { return X_; }
  const VectorXd& Y() const { return Y_; }
  Index n() const { return X_.rows(); }
  Index p() const { return X_.cols(); }

  /// n_j = [X^T X]_{jj}
  const VectorXd& gram_diag() const { return gram_diag_; }
  const VectorXd& xty() const { return xty_; }
  double yty() const { return yty_; }

 private:
  MatrixXd X_;
  VectorXd Y_;
  VectorXd gram_diag_;
  VectorXd xty_;
  double yty_ = 0.0;
};

enum class NoiseMode { Known, EmpiricalBayes };

std::string_view to_string(NoiseMode mode);

struct Hyperparameters {
  double a0 = 2.0;
  double bn = 0.0;
  double sigma = 1.0;
  NoiseMode noise_mode = NoiseMode::Known;
  Index blocks = 1;
  double tol = 1e-7;
  int max_iters = 500;

  /// Checks a0 > 1, bn > 0, sigma > 0, 1 <= blocks <= p; throws ConfigError.
  void validate(Index p) const;
};

/// Per-coordinate variational parameters. q(lambda_j) = Gamma(a_j, b_j)
/// (shape-rate), q(beta_j | lambda_j) = N(mu_j, 1/lambda_j); the marginal of
/// beta_j is Student-t with 2 a_j degrees of freedom, location mu_j and scale
/// sqrt(b_j / a_j).
struct VariationalState {
  VectorXd mu;
  VectorXd a;
  VectorXd b;
  double sigma = 1.0;

  Index size() const { return mu.size(); }
  /// a_j > 1, b_j > 0, sigma > 0, all finite; throws NumericError otherwise.
  void check_invariants() const;
};

struct FitResult {
  VariationalState state;
  std::vector<double> elbo_trace;  // negative ELBO after each outer iteration
  int iterations = 0;
  bool converged = false;
  double wall_time = 0.0;  // seconds
};

/// Half-open column range [begin, begin + size).
struct BlockRange {
  Index begin = 0;
  Index size = 0;
};

/// Contiguous near-equal partition of p columns into `blocks` ranges; the
/// first p % blocks ranges get one extra column.
std::vector<BlockRange> partition_blocks(Index p, Index blocks);

}  // namespace tshrink
