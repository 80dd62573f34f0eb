#include "tshrink/posterior.hpp"

#include <cmath>
#include <string>

#include "tshrink/error.hpp"
#include "tshrink/student_t.hpp"

namespace tshrink::posterior {
namespace {

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw DomainError("credible level must lie in (0, 1), got " + std::to_string(level));
  }
}

double half_width_quantile(double df, double level) { return student_t::quantile(0.5 * (1.0 + level), df); }

}  // namespace

Interval t_interval(double location, double scale, double df, double level) {
  check_level(level);
  if (!(scale > 0.0) || !(df > 0.0)) throw DomainError("t_interval: scale and df must be positive");
  const double half = half_width_quantile(df, level) * scale;
  return {location - half, location + half};
}

Interval credible_interval(Index j, const VariationalState& state, double level) {
  check_level(level);
  if (j < 0 || j >= state.size()) throw DomainError("credible_interval: index out of range");
  return t_interval(state.mu[j], std::sqrt(state.b[j] / state.a[j]), 2.0 * state.a[j], level);
}

SelectionResult select_from_intervals(std::vector<Interval> intervals, double level) {
  SelectionResult out;
  out.level = level;
  for (std::size_t j = 0; j < intervals.size(); ++j) {
    if (!intervals[j].contains(0.0)) out.selected.push_back(static_cast<Index>(j));
  }
  out.intervals = std::move(intervals);
  return out;
}

SelectionResult select_variables(const VariationalState& state, double level) {
  check_level(level);
  std::vector<Interval> intervals;
  intervals.reserve(static_cast<std::size_t>(state.size()));
  for (Index j = 0; j < state.size(); ++j) intervals.push_back(credible_interval(j, state, level));
  return select_from_intervals(std::move(intervals), level);
}

std::vector<Index> select_by_threshold(const VariationalState& state, double level) {
  check_level(level);
  std::vector<Index> out;
  for (Index j = 0; j < state.size(); ++j) {
    const double threshold = half_width_quantile(2.0 * state.a[j], level) * std::sqrt(state.b[j] / state.a[j]);
    if (std::abs(state.mu[j]) > threshold) out.push_back(j);
  }
  return out;
}

VectorXd posterior_mean(const VariationalState& state) { return state.mu; }

}  // namespace tshrink::posterior
