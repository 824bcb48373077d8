#pragma once

// Scalar special functions needed by the target distributions.

namespace qmatch::special {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kLogTwoPi = 1.83787706640934548356;  // log(2*pi)

/// Standard normal density.
double normal_pdf(double x);

/// Standard normal distribution function, Phi(x).
double normal_cdf(double x);

/// Inverse of Phi on (0,1). Wichura's AS 241 rational approximation
/// (relative accuracy about 1e-16 across the representable range).
double normal_quantile(double p);

/// tan(pi * x) for |x| < 1/2, exact at x = 0 and x = +-1/4.
double tan_pi(double x);

/// Regularized incomplete beta I_x(a, b). `y` must equal 1 - x; passing it
/// separately keeps full precision when x is close to 1.
double incomplete_beta(double a, double b, double x, double y);

/// Digamma function psi(x) for x > 0.
double digamma(double x);

/// log B(a, b).
double log_beta(double a, double b);

/// Student t with `nu` > 0 degrees of freedom (non-integer allowed).
double student_t_log_pdf(double nu, double x);
double student_t_cdf(double nu, double x);
/// Upper tail P(T > x) for x >= 0, computed without cancellation.
double student_t_upper_tail(double nu, double x);
/// Inverse of the t distribution function on (0,1); bracketed Newton on the
/// incomplete-beta tail, converged to 1e-12 relative in probability.
double student_t_quantile(double nu, double p);

}  // namespace qmatch::special
