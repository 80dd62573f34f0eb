#include <cmath>
#include <string>

#include "tshrink/error.hpp"
#include "tshrink/model.hpp"

namespace tshrink {

Dataset::Dataset(MatrixXd X, VectorXd Y) : X_(std::move(X)), Y_(std::move(Y)) {
  if (X_.rows() < 1 || X_.cols() < 1) throw InputError("dataset: design matrix must be at least 1x1");
  if (Y_.size() != X_.rows()) {
    throw InputError("dataset: response length " + std::to_string(Y_.size()) +
                     " does not match design rows " + std::to_string(X_.rows()));
  }
  if (!X_.allFinite()) throw InputError("dataset: design matrix has non-finite entries");
  if (!Y_.allFinite()) throw InputError("dataset: response has non-finite entries");
  gram_diag_ = X_.colwise().squaredNorm().transpose();
  for (Index j = 0; j < gram_diag_.size(); ++j) {
    if (!(gram_diag_[j] > 0.0)) throw InputError("dataset: column " + std::to_string(j) + " is all zero");
  }
  xty_ = X_.transpose() * Y_;
  yty_ = Y_.squaredNorm();
}

std::string_view to_string(NoiseMode mode) {
  return mode == NoiseMode::Known ? "known" : "empirical_bayes";
}

void Hyperparameters::validate(Index p) const {
  if (!(a0 > 1.0) || !std::isfinite(a0)) throw ConfigError("hyperparameters: a0 must be finite and > 1");
  if (!(bn > 0.0) || !std::isfinite(bn)) throw ConfigError("hyperparameters: bn must be finite and > 0");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("hyperparameters: sigma must be finite and > 0");
  if (blocks < 1 || blocks > p) {
    throw ConfigError("hyperparameters: block count " + std::to_string(blocks) + " outside [1, " +
                      std::to_string(p) + "]");
  }
  if (!(tol >= 0.0)) throw ConfigError("hyperparameters: tol must be non-negative");
  if (max_iters < 1) throw ConfigError("hyperparameters: max_iters must be >= 1");
}

void VariationalState::check_invariants() const {
  if (a.size() != mu.size() || b.size() != mu.size()) throw NumericError("state: parameter length mismatch");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw NumericError("state: sigma must be finite and positive");
  for (Index j = 0; j < mu.size(); ++j) {
    if (!std::isfinite(mu[j])) throw NumericError("state: mu[" + std::to_string(j) + "] is not finite");
    if (!(a[j] > 1.0) || !std::isfinite(a[j]))
      throw NumericError("state: a[" + std::to_string(j) + "] = " + std::to_string(a[j]) + " violates a > 1");
    if (!(b[j] > 0.0) || !std::isfinite(b[j]))
      throw NumericError("state: b[" + std::to_string(j) + "] = " + std::to_string(b[j]) + " violates b > 0");
  }
}

std::vector<BlockRange> partition_blocks(Index p, Index blocks) {
  if (p < 1 || blocks < 1 || blocks > p) {
    throw ConfigError("partition_blocks: need 1 <= blocks <= p (blocks=" + std::to_string(blocks) +
                      ", p=" + std::to_string(p) + ")");
  }
  std::vector<BlockRange> out;
  out.reserve(static_cast<std::size_t>(blocks));
  const Index base = p / blocks;
  const Index extra = p % blocks;
  Index begin = 0;
  for (Index k = 0; k < blocks; ++k) {
    const Index size = base + (k < extra ? 1 : 0);
    out.push_back({begin, size});
    begin += size;
  }
  return out;
}

}  // namespace tshrink
