#include "tshrink/student_t.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "tshrink/error.hpp"
#include "tshrink/special_functions.hpp"

namespace tshrink::student_t {
namespace {

double stirling_tail(double x) {
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  return inv * (1.0 / 12.0 + inv2 * (-1.0 / 360.0 + inv2 * (1.0 / 1260.0 + inv2 * (-1.0 / 1680.0))));
}

// Modified Lentz evaluation of the incomplete-beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int max_iterations = 20000;
  constexpr double eps = 1e-16;
  constexpr double tiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) return h;
  }
  throw SolverError("incomplete_beta: continued fraction did not converge (a=" + std::to_string(a) +
                    ", b=" + std::to_string(b) + ", x=" + std::to_string(x) + ")");
}

double log_beta(double a, double b) {
  if (b >= a) return special::log_gamma(a) - log_gamma_ratio(b, a);
  return special::log_gamma(b) - log_gamma_ratio(a, b);
}

double upper_tail(double t, double df) {
  const double t2 = t * t;
  const double x = df / (df + t2);
  const double y = t2 / (df + t2);
  return 0.5 * incomplete_beta(0.5 * df, 0.5, x, y);
}

}  // namespace

double log_gamma_ratio(double b, double a) {
  if (b < 50.0) return special::log_gamma(b + a) - special::log_gamma(b);
  return (b - 0.5) * std::log1p(a / b) + a * std::log(b + a) - a + stirling_tail(b + a) -
         stirling_tail(b);
}

double incomplete_beta(double a, double b, double x, double y) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incomplete_beta: shape parameters must be positive");
  if (!(x >= 0.0) || !(y >= 0.0)) throw DomainError("incomplete_beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (y == 0.0) return 1.0;
  const double log_x = x < 0.5 ? std::log(x) : std::log1p(-y);
  const double log_y = y < 0.5 ? std::log(y) : std::log1p(-x);
  const double front = std::exp(a * log_x + b * log_y - log_beta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, y) / b;
}

double incomplete_beta(double a, double b, double x) { return incomplete_beta(a, b, x, 1.0 - x); }

double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0)) throw DomainError("normal_quantile: probability must lie in (0, 1)");
  // The refinement below needs Phi(x) - prob without cancellation; 1 - prob
  // is exact for prob >= 0.5.
  if (prob > 0.5) return -normal_quantile(1.0 - prob);
  // Acklam's rational approximation followed by one Halley step.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double low = 0.02425;
  double x;
  if (prob < low) {
    const double q = std::sqrt(-2.0 * std::log(prob));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (prob <= 1.0 - low) {
    const double q = prob - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-prob));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - prob;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double log_normalizer(double df) {
  if (!(df > 0.0)) throw DomainError("student_t::log_normalizer: df must be positive");
  return log_gamma_ratio(0.5 * df, 0.5) - 0.5 * std::log(df * std::numbers::pi);
}

double log_pdf(double t, double df) {
  if (!(df > 0.0)) throw DomainError("student_t::log_pdf: df must be positive");
  return log_normalizer(df) - 0.5 * (df + 1.0) * std::log1p(t * t / df);
}

double cdf(double t, double df) {
  if (!(df > 0.0)) throw DomainError("student_t::cdf: df must be positive");
  if (std::isnan(t)) throw DomainError("student_t::cdf: NaN argument");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double tail = upper_tail(std::abs(t), df);
  return t >= 0.0 ? 1.0 - tail : tail;
}

double quantile(double prob, double df) {
  if (!(prob > 0.0 && prob < 1.0)) throw DomainError("student_t::quantile: probability must lie in (0, 1)");
  if (!(df > 0.0)) throw DomainError("student_t::quantile: df must be positive");
  if (prob == 0.5) return 0.0;
  const double sign = prob > 0.5 ? 1.0 : -1.0;
  const double tail = prob > 0.5 ? 1.0 - prob : prob;

  // Cornish-Fisher start from the normal quantile.
  const double z = -normal_quantile(tail);
  double t = z + (z * z * z + z) / (4.0 * df) +
             (5.0 * std::pow(z, 5) + 16.0 * z * z * z + 3.0 * z) / (96.0 * df * df);

  double lo = 0.0;
  double hi = std::max(2.0 * z, 1.0);
  while (upper_tail(hi, df) > tail) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw SolverError("student_t::quantile: could not bracket quantile");
  }
  if (!(t > lo && t < hi)) t = 0.5 * (lo + hi);

  for (int iter = 0; iter < 200; ++iter) {
    const double residual = upper_tail(t, df) - tail;
    if (residual > 0.0) {
      lo = t;
    } else if (residual < 0.0) {
      hi = t;
    } else {
      break;
    }
    double next = t + residual / std::exp(log_pdf(t, df));
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const bool done = std::abs(next - t) <= 1e-15 * (1.0 + t);
    t = next;
    if (done || hi - lo <= 1e-15 * (1.0 + hi)) break;
  }
  return sign * t;
}

}  // namespace tshrink::student_t
