#include "tshrink/block_solver.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <string>

#include "tshrink/error.hpp"

namespace tshrink {
namespace {

void check_penalty(const VectorXd& penalty) {
  for (Index j = 0; j < penalty.size(); ++j) {
    if (!(penalty[j] > 0.0) || !std::isfinite(penalty[j])) {
      throw NumericError("block solve: penalty entry " + std::to_string(j) + " = " +
                         std::to_string(penalty[j]) + " is not finite and positive");
    }
  }
}

template <typename Matrix>
Eigen::LLT<MatrixXd> factorize(Matrix&& m, Index block) {
  Eigen::LLT<MatrixXd> llt(std::forward<Matrix>(m));
  if (llt.info() != Eigen::Success) {
    throw NumericError("block solve: Cholesky factorization failed for block " + std::to_string(block));
  }
  return llt;
}

// X_k D^{-1} X_k^T + I
MatrixXd dual_system(const Eigen::Ref<const MatrixXd>& Xk, const VectorXd& inv_penalty) {
  const Index n = Xk.rows();
  MatrixXd m = MatrixXd::Identity(n, n);
  const MatrixXd scaled = Xk * inv_penalty.cwiseSqrt().asDiagonal();
  m.selfadjointView<Eigen::Lower>().rankUpdate(scaled);
  m.triangularView<Eigen::StrictlyUpper>() = m.transpose();
  return m;
}

}  // namespace

BlockSolver::BlockSolver(const Dataset& data, Index blocks)
    : data_(&data), blocks_(partition_blocks(data.p(), blocks)) {
  const Index n = data.n();
  grams_.resize(blocks_.size());
  dual_.resize(blocks_.size());
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const auto [begin, size] = blocks_[k];
    dual_[k] = size > 2 * n;
    if (!dual_[k]) {
      const auto Xk = data.X().middleCols(begin, size);
      grams_[k] = MatrixXd::Zero(size, size);
      grams_[k].selfadjointView<Eigen::Lower>().rankUpdate(Xk.transpose());
      grams_[k].triangularView<Eigen::StrictlyUpper>() = grams_[k].transpose();
    }
  }
}

MatrixXd BlockSolver::block_precision(Index k, const VectorXd& penalty_block) const {
  const auto [begin, size] = blocks_[static_cast<std::size_t>(k)];
  MatrixXd a = dual_[static_cast<std::size_t>(k)]
                   ? MatrixXd(data_->X().middleCols(begin, size).transpose() * data_->X().middleCols(begin, size))
                   : grams_[static_cast<std::size_t>(k)];
  a.diagonal() += penalty_block;
  return a;
}

VectorXd BlockSolver::solve_block(Index k, const VectorXd& penalty_block, const VectorXd& partial_residual) const {
  check_penalty(penalty_block);
  const auto kk = static_cast<std::size_t>(k);
  const auto [begin, size] = blocks_[kk];
  const auto Xk = data_->X().middleCols(begin, size);
  if (dual_[kk]) {
    const VectorXd inv = penalty_block.cwiseInverse();
    const auto llt = factorize(dual_system(Xk, inv), k);
    const VectorXd w = llt.solve(partial_residual);
    return inv.cwiseProduct(Xk.transpose() * w);
  }
  MatrixXd a = grams_[kk];
  a.diagonal() += penalty_block;
  const auto llt = factorize(std::move(a), k);
  return llt.solve(Xk.transpose() * partial_residual);
}

void BlockSolver::sweep_mean(const VectorXd& penalty, VectorXd& coef) const {
  const MatrixXd& X = data_->X();
  if (blocks_.size() == 1) {
    coef = solve_block(0, penalty, data_->Y());
    return;
  }
  VectorXd residual = data_->Y() - X * coef;
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const auto [begin, size] = blocks_[k];
    const auto Xk = X.middleCols(begin, size);
    residual.noalias() += Xk * coef.segment(begin, size);
    coef.segment(begin, size) = solve_block(static_cast<Index>(k), penalty.segment(begin, size), residual);
    residual.noalias() -= Xk * coef.segment(begin, size);
  }
}

void BlockSolver::sweep_sample(const VectorXd& penalty, double sigma, VectorXd& coef, Rng& rng) const {
  check_penalty(penalty);
  const MatrixXd& X = data_->X();
  const Index n = data_->n();
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&](Index m) {
    VectorXd z(m);
    for (Index i = 0; i < m; ++i) z[i] = normal(rng);
    return z;
  };

  VectorXd residual = data_->Y() - X * coef;
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const auto [begin, size] = blocks_[k];
    const auto Xk = X.middleCols(begin, size);
    const VectorXd pen = penalty.segment(begin, size);
    residual.noalias() += Xk * coef.segment(begin, size);

    VectorXd sample;
    if (dual_[k]) {
      // Exact draw in O(n^2 |k|): u ~ N(0, sigma^2 D^{-1}), delta ~ N(0, I_n),
      // w = M^{-1}(r/sigma - X u/sigma - delta), coef = u + sigma D^{-1} X^T w.
      const VectorXd inv = pen.cwiseInverse();
      const VectorXd u = sigma * inv.cwiseSqrt().cwiseProduct(draw(size));
      const VectorXd delta = draw(n);
      const auto llt = factorize(dual_system(Xk, inv), static_cast<Index>(k));
      const VectorXd w = llt.solve((residual - Xk * u) / sigma - delta);
      sample = u + sigma * inv.cwiseProduct(Xk.transpose() * w);
    } else {
      MatrixXd a = grams_[k];
      a.diagonal() += pen;
      const auto llt = factorize(std::move(a), static_cast<Index>(k));
      const VectorXd mean = llt.solve(Xk.transpose() * residual);
      sample = mean + sigma * llt.matrixU().solve(draw(size));
    }
    if (!sample.allFinite()) {
      throw NumericError("block draw: non-finite coefficient draw in block " + std::to_string(k));
    }
    coef.segment(begin, size) = sample;
    residual.noalias() -= Xk * sample;
  }
}

}  // namespace tshrink
