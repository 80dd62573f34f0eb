#include <doctest.h>

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>

#include "tshrink/error.hpp"
#include "tshrink/posterior.hpp"
#include "tshrink/rng.hpp"

using namespace tshrink;

namespace {

VariationalState random_state(Index p, Rng& rng) {
  std::uniform_real_distribution<double> mu(-1.5, 1.5), log_a(0.0, 8.0), log_b(-6.0, 2.0);
  VariationalState s;
  s.mu.resize(p);
  s.a.resize(p);
  s.b.resize(p);
  for (Index j = 0; j < p; ++j) {
    s.mu[j] = mu(rng);
    s.a[j] = 1.0 + std::exp(log_a(rng)) * 1e-2;
    s.b[j] = std::exp(log_b(rng));
  }
  return s;
}

VariationalState single(double mu, double a, double b) {
  VariationalState s;
  s.mu = VectorXd::Constant(1, mu);
  s.a = VectorXd::Constant(1, a);
  s.b = VectorXd::Constant(1, b);
  return s;
}

}  // namespace

TEST_CASE("intervals are symmetric about the location") {
  Rng rng = make_rng(31, Stream::Property);
  const VariationalState s = random_state(200, rng);
  for (double level : {0.5, 0.9, 0.95, 0.999}) {
    for (Index j = 0; j < s.size(); ++j) {
      const posterior::Interval iv = posterior::credible_interval(j, s, level);
      CHECK(iv.lo < iv.hi);
      CHECK((s.mu[j] - iv.lo) == doctest::Approx(iv.hi - s.mu[j]).epsilon(1e-12));
    }
  }
}

TEST_CASE("interval carries the requested mass of the t density") {
  // df 2a = 5, scale sqrt(b/a) = 0.3, location 1
  const double a = 2.5, b = 0.09 * a;
  const VariationalState s = single(1.0, a, b);
  const boost::math::students_t_distribution<double> t(5.0);
  for (double level : {0.5, 0.8, 0.95, 0.99}) {
    const posterior::Interval iv = posterior::credible_interval(0, s, level);
    auto density = [&](double x) { return boost::math::pdf(t, (x - 1.0) / 0.3) / 0.3; };
    double error = 0.0;
    const double mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(density, iv.lo, iv.hi, 15,
                                                                                       1e-14, &error);
    CHECK(std::abs(mass - level) < 1e-6);
  }
}

TEST_CASE("large shape approaches the Gaussian interval") {
  const boost::math::normal_distribution<double> z;
  for (double level : {0.8, 0.95, 0.99}) {
    const VariationalState s = single(-0.4, 1e6, 2.5e5);
    const posterior::Interval iv = posterior::credible_interval(0, s, level);
    const double want = 2.0 * boost::math::quantile(z, 0.5 * (1.0 + level)) * 0.5;
    CHECK(std::abs((iv.hi - iv.lo) - want) / want < 1e-3);
  }
}

TEST_CASE("selection by interval and by threshold agree") {
  Rng rng = make_rng(32, Stream::Property);
  std::bernoulli_distribution zero(0.2);
  for (int trial = 0; trial < 100; ++trial) {
    VariationalState s = random_state(50, rng);
    for (Index j = 0; j < s.size(); ++j)
      if (zero(rng)) s.mu[j] = 0.0;
    const posterior::SelectionResult sel = posterior::select_variables(s, 0.95);
    CHECK(sel.selected == posterior::select_by_threshold(s, 0.95));
    CHECK(sel.intervals.size() == 50);
    CHECK(sel.level == 0.95);
    for (Index j = 0; j < s.size(); ++j) {
      const bool chosen = std::binary_search(sel.selected.begin(), sel.selected.end(), j);
      CHECK(chosen == !sel.intervals[j].contains(0.0));
      if (s.mu[j] == 0.0) CHECK_FALSE(chosen);
    }
  }
}

TEST_CASE("raising the level widens intervals and shrinks the selection") {
  Rng rng = make_rng(33, Stream::Property);
  const VariationalState s = random_state(300, rng);
  std::vector<Index> previous = posterior::select_variables(s, 0.01).selected;
  double last_level = 0.01;
  for (double level : {0.1, 0.5, 0.9, 0.95, 0.99, 0.9999}) {
    const auto sel = posterior::select_variables(s, level);
    CHECK(std::includes(previous.begin(), previous.end(), sel.selected.begin(), sel.selected.end()));
    for (Index j = 0; j < s.size(); ++j) {
      const auto wide = sel.intervals[j];
      const auto narrow = posterior::credible_interval(j, s, last_level);
      CHECK(wide.lo < narrow.lo);
      CHECK(wide.hi > narrow.hi);
    }
    previous = sel.selected;
    last_level = level;
  }
}

TEST_CASE("posterior mean is the location and matches sampling") {
  Rng rng = make_rng(34, Stream::Property);
  VariationalState s;
  s.mu = VectorXd{{0.8, -2.0, 0.0}};
  s.a = VectorXd{{2.5, 3.0, 6.0}};
  s.b = VectorXd{{0.4, 1.5, 0.01}};
  CHECK(posterior::posterior_mean(s) == s.mu);

  VariationalState other = s;
  other.a *= 3.0;
  other.b /= 7.0;
  CHECK(posterior::posterior_mean(other) == s.mu);

  std::normal_distribution<double> z(0.0, 1.0);
  constexpr int kDraws = 1'000'000;
  for (Index j = 0; j < 3; ++j) {
    std::gamma_distribution<double> lambda(s.a[j], 1.0 / s.b[j]);
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < kDraws; ++i) {
      const double beta = s.mu[j] + z(rng) / std::sqrt(lambda(rng));
      sum += beta;
      sum_sq += beta * beta;
    }
    const double mean = sum / kDraws;
    const double se = std::sqrt((sum_sq / kDraws - mean * mean) / kDraws);
    CHECK(std::abs(mean - s.mu[j]) < 3.0 * se);
  }
}

TEST_CASE("invalid levels and indices are rejected") {
  const VariationalState s = single(0.0, 2.0, 1.0);
  for (double level : {0.0, 1.0, -0.1, 1.5, std::nan("")}) {
    CHECK_THROWS_AS(posterior::credible_interval(0, s, level), DomainError);
    CHECK_THROWS_AS(posterior::select_variables(s, level), DomainError);
  }
  CHECK_THROWS_AS(posterior::credible_interval(1, s, 0.95), DomainError);
  CHECK_THROWS_AS(posterior::t_interval(0.0, 0.0, 3.0, 0.95), DomainError);
}
