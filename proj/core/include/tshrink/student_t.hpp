#pragma once

namespace tshrink::student_t {

/// Regularized incomplete beta I_x(a, b). `y` must equal 1 - x; passing it
/// separately keeps precision when x is close to 1.
double incomplete_beta(double a, double b, double x, double y);
double incomplete_beta(double a, double b, double x);

/// ln Gamma(b + a) - ln Gamma(b), stable for large b.
double log_gamma_ratio(double b, double a);

/// Standard normal quantile.
double normal_quantile(double prob);

/// Log density of the standard Student-t with `df` degrees of freedom
/// (df may be fractional).
double log_pdf(double t, double df);
/// The t-independent part of log_pdf: ln Gamma((df+1)/2) - ln Gamma(df/2) - ln(df pi)/2.
double log_normalizer(double df);

double cdf(double t, double df);

/// Quantile of the standard Student-t, accurate to ~1e-12 relative.
double quantile(double prob, double df);

}  // namespace tshrink::student_t
