#pragma once

#include <cmath>
#include <random>

#include "tshrink/model.hpp"
#include "tshrink/rng.hpp"

namespace test_support {

using tshrink::Dataset;
using tshrink::Index;
using tshrink::MatrixXd;
using tshrink::VectorXd;

inline MatrixXd gaussian_matrix(Index rows, Index cols, tshrink::Rng& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = z(rng);
  return m;
}

inline VectorXd gaussian_vector(Index size, tshrink::Rng& rng) { return gaussian_matrix(size, 1, rng).col(0); }

// Y = X beta + sigma eps with a few nonzero leading coefficients.
inline Dataset random_problem(Index n, Index p, tshrink::Rng& rng, double sigma = 1.0) {
  MatrixXd X = gaussian_matrix(n, p, rng);
  VectorXd beta = VectorXd::Zero(p);
  for (Index j = 0; j < std::min<Index>(p, 3); ++j) beta[j] = 3.0 - static_cast<double>(j);
  VectorXd Y = X * beta + sigma * gaussian_vector(n, rng);
  return Dataset(std::move(X), std::move(Y));
}

inline double relative_error(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

}  // namespace test_support
