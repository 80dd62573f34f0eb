#pragma once

#include <Eigen/Core>
#include <vector>

#include "tshrink/model.hpp"
#include "tshrink/rng.hpp"

namespace tshrink {

/// Blockwise Gauss-Seidel machinery shared by the variational mean update and
/// the Gibbs coefficient draws. For each block k it works with the system
///
///   (X_k^T X_k + D_k) coef_k = X_k^T (Y - X_{-k} coef_{-k}),   D = diag(penalty)
///
/// where penalty = sigma^2 * lambda. Blocks much wider than n are solved in
/// the n x n dual form (X_k D_k^{-1} X_k^T + I) via the push-through identity;
/// narrower blocks use the cached block Gram matrix. Both paths use a Cholesky
/// factorization and report failure as NumericError.
class BlockSolver {
 public:
  BlockSolver(const Dataset& data, Index blocks);

  const std::vector<BlockRange>& blocks() const { return blocks_; }
  const Dataset& data() const { return *data_; }

  /// One Gauss-Seidel pass over all blocks, solving each block exactly with
  /// the freshest values of the others. `coef` is updated in place.
  void sweep_mean(const VectorXd& penalty, VectorXd& coef) const;

  /// One Gauss-Seidel pass of exact block draws from
  ///   N(mean_k, sigma^2 (X_k^T X_k + D_k)^{-1}).
  void sweep_sample(const VectorXd& penalty, double sigma, VectorXd& coef, Rng& rng) const;

  /// Conditional mean of block k given the partial residual
  /// Y - X_{-k} coef_{-k}.
  VectorXd solve_block(Index k, const VectorXd& penalty_block, const VectorXd& partial_residual) const;

  /// X_k^T X_k + D_k.
  MatrixXd block_precision(Index k, const VectorXd& penalty_block) const;

  bool uses_dual(Index k) const { return dual_[static_cast<std::size_t>(k)]; }

 private:
  const Dataset* data_;
  std::vector<BlockRange> blocks_;
  std::vector<MatrixXd> grams_;  // empty for dual blocks
  std::vector<bool> dual_;
};

}  // namespace tshrink
