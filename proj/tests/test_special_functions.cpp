#include <doctest.h>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "support.hpp"
#include "tshrink/error.hpp"
#include "tshrink/special_functions.hpp"

using namespace tshrink;
using test_support::relative_error;

namespace {

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> xs;
  for (int i = 0; i < count; ++i) {
    xs.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
  }
  return xs;
}

// Points where the log-gamma value is near zero or the argument crosses an
// internal branch.
std::vector<double> awkward_points() {
  std::vector<double> xs;
  for (const double centre : {1.0, 1.5, 2.0, 2.5, 12.0}) {
    for (const double eps : {1e-12, 1e-9, 1e-6, 1e-3, 0.1}) {
      xs.push_back(centre - eps);
      xs.push_back(centre + eps);
    }
  }
  return xs;
}

}  // namespace

TEST_CASE("log_gamma: exact values") {
  CHECK(std::abs(special::log_gamma(1.0)) < 1e-16);
  CHECK(std::abs(special::log_gamma(2.0)) < 1e-16);
  CHECK(relative_error(special::log_gamma(5.0), std::log(24.0)) < 1e-14);
  CHECK(relative_error(special::log_gamma(0.5), 0.5 * std::log(std::numbers::pi)) < 1e-14);
}

TEST_CASE("log_gamma: relative error against Boost on [1e-3, 1e6]") {
  double worst = 0.0;
  double worst_x = 0.0;
  auto xs = log_grid(1e-3, 1e6, 4000);
  const auto extra = awkward_points();
  xs.insert(xs.end(), extra.begin(), extra.end());
  for (const double x : xs) {
    const double want = boost::math::lgamma(x);
    if (want == 0.0) continue;
    const double err = relative_error(special::log_gamma(x), want);
    if (err > worst) {
      worst = err;
      worst_x = x;
    }
  }
  INFO("worst x = " << worst_x);
  CHECK(worst <= 1e-12);
}

TEST_CASE("digamma: absolute error against Boost on [1e-3, 1e6]") {
  double worst = 0.0;
  for (const double x : log_grid(1e-3, 1e6, 4000)) {
    worst = std::max(worst, std::abs(special::digamma(x) - boost::math::digamma(x)));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("trigamma: absolute error against Boost on [1e-3, 1e6]") {
  // psi_1(1e-3) is about 1e6, whose spacing between doubles is 1.2e-10, so the
  // absolute bound is relaxed to a few ulps where the value itself is large.
  double worst_scaled = 0.0;
  for (const double x : log_grid(1e-3, 1e6, 4000)) {
    const double want = boost::math::trigamma(x);
    const double bound = std::max(1e-10, 4.0 * std::numeric_limits<double>::epsilon() * std::abs(want));
    worst_scaled = std::max(worst_scaled, std::abs(special::trigamma(x) - want) / bound);
  }
  CHECK(worst_scaled <= 1.0);
}

TEST_CASE("digamma and trigamma: special values") {
  CHECK(std::abs(special::digamma(1.0) + special::kEulerGamma) < 1e-14);
  CHECK(std::abs(special::trigamma(1.0) - std::numbers::pi * std::numbers::pi / 6.0) < 1e-14);
  CHECK(std::abs(special::digamma(0.5) - (-special::kEulerGamma - 2.0 * std::numbers::ln2)) < 1e-14);
  CHECK(std::abs(special::trigamma(0.5) - std::numbers::pi * std::numbers::pi / 2.0) < 1e-13);
}

TEST_CASE("recurrences on random points in [1e-2, 1e4]") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> log_x(std::log(1e-2), std::log(1e4));
  for (int i = 0; i < 1000; ++i) {
    const double x = std::exp(log_x(rng));
    CHECK(std::abs(special::digamma(x + 1.0) - special::digamma(x) - 1.0 / x) <= 1e-10 * std::max(1.0, 1.0 / x));
    CHECK(std::abs(special::trigamma(x + 1.0) - special::trigamma(x) + 1.0 / (x * x)) <=
          1e-10 * std::max(1.0, 1.0 / (x * x)));
    CHECK(std::abs(special::log_gamma(x + 1.0) - special::log_gamma(x) - std::log(x)) <=
          1e-12 * std::max(1.0, std::abs(special::log_gamma(x + 1.0))));
  }
}

TEST_CASE("finite-difference consistency") {
  const double h = 1e-5;
  const double fd_digamma = (special::log_gamma(10.0 + h) - special::log_gamma(10.0 - h)) / (2.0 * h);
  CHECK(std::abs(special::digamma(10.0) - fd_digamma) < 1e-7);
  const double fd_trigamma = (special::digamma(7.3 + h) - special::digamma(7.3 - h)) / (2.0 * h);
  CHECK(std::abs(special::trigamma(7.3) - fd_trigamma) < 1e-6);
}

TEST_CASE("monotonicity and sign on a log grid") {
  const auto xs = log_grid(1e-3, 1e6, 2000);
  for (std::size_t i = 1; i < xs.size(); ++i) {
    CHECK(special::digamma(xs[i]) > special::digamma(xs[i - 1]));
    CHECK(special::trigamma(xs[i]) < special::trigamma(xs[i - 1]));
    CHECK(special::trigamma(xs[i]) > 0.0);
  }
}

TEST_CASE("domain errors") {
  for (const double bad : {0.0, -1.0, -0.5, std::numeric_limits<double>::quiet_NaN()}) {
    CHECK_THROWS_AS(special::log_gamma(bad), DomainError);
    CHECK_THROWS_AS(special::digamma(bad), DomainError);
    CHECK_THROWS_AS(special::trigamma(bad), DomainError);
  }
}
