#pragma once

#include <vector>

#include "tshrink/model.hpp"

namespace tshrink::posterior {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return lo <= x && x <= hi; }
};

struct SelectionResult {
  std::vector<Index> selected;  // ascending column indices whose interval excludes 0
  std::vector<Interval> intervals;
  double level = 0.95;
};

/// location +/- t_{(1+level)/2, df} * scale.
Interval t_interval(double location, double scale, double df, double level);

/// Marginal credible interval of beta_j under q: Student-t with 2 a_j d.f.,
/// location mu_j, scale sqrt(b_j / a_j). Throws DomainError unless
/// 0 < level < 1.
Interval credible_interval(Index j, const VariationalState& state, double level);

/// j is selected iff its credible interval excludes zero.
SelectionResult select_variables(const VariationalState& state, double level);

/// Selection from precomputed intervals (e.g. Gibbs chain quantiles).
SelectionResult select_from_intervals(std::vector<Interval> intervals, double level);

/// Same set as select_variables, computed from |mu_j| > t_{(1+level)/2, 2a_j} sqrt(b_j/a_j).
std::vector<Index> select_by_threshold(const VariationalState& state, double level);

/// Mean of the marginal q(beta) (its location vector mu).
VectorXd posterior_mean(const VariationalState& state);

}  // namespace tshrink::posterior
