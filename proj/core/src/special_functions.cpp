#include "tshrink/special_functions.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "tshrink/error.hpp"

namespace tshrink::special {
namespace {

void check_domain(double x, const char* name) {
  if (!(x > 0.0)) {
    throw DomainError(std::string(name) + ": argument must be positive, got " + std::to_string(x));
  }
}

constexpr int kZetaTerms = 40;

// zeta(k) - 1 for k = 2..kZetaTerms+1, by direct summation plus an
// Euler-Maclaurin tail. Accurate to a few ulps.
std::array<double, kZetaTerms> make_zeta_minus_one() {
  // B_2, B_4, ..., B_12
  constexpr std::array<double, 6> bernoulli = {1.0 / 6.0,  -1.0 / 30.0, 1.0 / 42.0,
                                               -1.0 / 30.0, 5.0 / 66.0,  -691.0 / 2730.0};
  constexpr int cutoff = 20;
  std::array<double, kZetaTerms> out{};
  for (int i = 0; i < kZetaTerms; ++i) {
    const double k = i + 2;
    long double tail = std::pow(static_cast<long double>(cutoff), 1.0L - k) / (k - 1.0) +
                       0.5L * std::pow(static_cast<long double>(cutoff), -k);
    // sum_j B_2j/(2j)! * k(k+1)...(k+2j-2) * N^(-k-2j+1)
    long double rising = k;  // k(k+1)...(k+2j-2)
    long double factorial = 2.0L;
    for (int j = 1; j <= static_cast<int>(bernoulli.size()); ++j) {
      tail += bernoulli[j - 1] / factorial * rising *
              std::pow(static_cast<long double>(cutoff), -k - 2.0L * j + 1.0L);
      rising *= (k + 2.0L * j - 1.0L) * (k + 2.0L * j);
      factorial *= (2.0L * j + 1.0L) * (2.0L * j + 2.0L);
    }
    long double head = 0.0L;
    for (int m = cutoff - 1; m >= 2; --m) head += std::pow(static_cast<long double>(m), -k);
    out[i] = static_cast<double>(head + tail);
  }
  return out;
}

const std::array<double, kZetaTerms>& zeta_minus_one() {
  static const std::array<double, kZetaTerms> table = make_zeta_minus_one();
  return table;
}

// ln Gamma(2 + z) for |z| <= 0.5:
//   z(1 - gamma) + sum_{k>=2} (-1)^k (zeta(k) - 1) z^k / k
double log_gamma_near_two(double z) {
  const auto& zm1 = zeta_minus_one();
  double sum = 0.0;
  double power = z * z;
  for (int i = 0; i < kZetaTerms; ++i) {
    const int k = i + 2;
    const double term = ((k % 2 == 0) ? 1.0 : -1.0) * zm1[i] * power / k;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    power *= z;
  }
  return z * (1.0 - kEulerGamma) + sum;
}

double log_gamma_stirling(double x) {
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv * (1.0 / 12.0 +
             inv2 * (-1.0 / 360.0 +
                     inv2 * (1.0 / 1260.0 +
                             inv2 * (-1.0 / 1680.0 +
                                     inv2 * (1.0 / 1188.0 +
                                             inv2 * (-691.0 / 360360.0 + inv2 * (1.0 / 156.0)))))));
  constexpr double half_log_two_pi = 0.91893853320467274178032973640562;
  return (x - 0.5) * std::log(x) - x + half_log_two_pi + series;
}

}  // namespace

double log_gamma(double x) {
  check_domain(x, "log_gamma");
  if (std::isinf(x)) return x;
  if (x == 1.0 || x == 2.0) return 0.0;
  if (x < 0.5) return log_gamma(x + 1.0) - std::log(x);
  if (x < 1.5) return log_gamma_near_two(x - 1.0) - std::log1p(x - 1.0);
  if (x <= 2.5) return log_gamma_near_two(x - 2.0);
  if (x < 12.0) {
    double y = x;
    double product = 1.0;
    while (y > 2.5) {
      y -= 1.0;
      product *= y;
    }
    return log_gamma_near_two(y - 2.0) + std::log(product);
  }
  return log_gamma_stirling(x);
}

double digamma(double x) {
  check_domain(x, "digamma");
  if (std::isinf(x)) return x;
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv2 = 1.0 / (x * x);
  const double series =
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 -
                              inv2 * (1.0 / 240.0 -
                                      inv2 * (1.0 / 132.0 -
                                              inv2 * (691.0 / 32760.0 - inv2 * (1.0 / 12.0)))))));
  return result + std::log(x) - 0.5 / x - series;
}

double trigamma(double x) {
  check_domain(x, "trigamma");
  if (std::isinf(x)) return 0.0;
  double result = 0.0;
  while (x < 10.0) {
    result += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // 1/x + 1/(2x^2) + sum_k B_2k / x^(2k+1)
  const double series =
      inv * inv2 *
      (1.0 / 6.0 +
       inv2 * (-1.0 / 30.0 +
               inv2 * (1.0 / 42.0 +
                       inv2 * (-1.0 / 30.0 +
                               inv2 * (5.0 / 66.0 + inv2 * (-691.0 / 2730.0 + inv2 * (7.0 / 6.0)))))));
  return result + inv + 0.5 * inv2 + series;
}

}  // namespace tshrink::special
