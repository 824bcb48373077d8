#include "qmatch/special_functions.hpp"

#include <cmath>
#include <limits>

#include "qmatch/errors.hpp"

namespace qmatch::special {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Remainder of Stirling's series: lgamma(x) - [(x-1/2)log x - x + log(2pi)/2].
// Accurate to a few ulps for x >= 10.
double stirling_correction(double x) {
  const double r = 1.0 / x;
  const double r2 = r * r;
  return r * (1.0 / 12 +
              r2 * (-1.0 / 360 +
                    r2 * (1.0 / 1260 +
                          r2 * (-1.0 / 1680 + r2 * (1.0 / 1188 + r2 * (-691.0 / 360360))))));
}

// lgamma(a) - lgamma(a + b) for a >= 10, without the cancellation of two
// large lgamma values.
double lgamma_ratio_large(double a, double b) {
  return -b * std::log(a) - (a + b - 0.5) * std::log1p(b / a) + b + stirling_correction(a) -
         stirling_correction(a + b);
}

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr int kMaxIter = 100000;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw NumericError("incomplete beta continued fraction did not converge", {a, b, x});
}

}  // namespace

double normal_pdf(double x) { return std::exp(-0.5 * x * x - 0.5 * kLogTwoPi); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must lie in (0,1)");

  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
              6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
            1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
          1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
    const double den =
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
              3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
            5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
          4.2313330701600911252e+1) * r + 1.0);
    return q * num / den;
  }

  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
              3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
            4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
            2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
            5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

double tan_pi(double x) {
  if (!(std::fabs(x) < 0.5)) throw DomainError("tan_pi: |x| must be below 1/2");
  const double ax = std::fabs(x);
  double t;
  if (ax == 0.25) {
    t = 1.0;
  } else if (ax > 0.25) {
    t = 1.0 / std::tan(kPi * (0.5 - ax));
  } else {
    t = std::tan(kPi * ax);
  }
  return std::signbit(x) ? -t : t;
}

double log_beta(double a, double b) {
  if (a < b) std::swap(a, b);
  if (a >= 10.0) return std::lgamma(b) + lgamma_ratio_large(a, b);
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace {

// Callers that know log x and log y more accurately than log(x) of a rounded
// x pass them here; the prefactor x^a y^b is sensitive to them for large a.
double incomplete_beta_with_logs(double a, double b, double x, double y, double log_x, double log_y) {
  const double front = std::exp(a * log_x + b * log_y - log_beta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, y) / b;
}

}  // namespace

double incomplete_beta(double a, double b, double x, double y) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("incomplete_beta: a and b must be positive");
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  return incomplete_beta_with_logs(a, b, x, y, std::log(x), std::log(y));
}

double digamma(double x) {
  if (!(x > 0.0)) throw DomainError("digamma: x must be positive");
  double acc = 0.0;
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double r2 = 1.0 / (x * x);
  return acc + std::log(x) - 0.5 / x -
         r2 * (1.0 / 12 - r2 * (1.0 / 120 - r2 * (1.0 / 252 - r2 * (1.0 / 240 - r2 * (1.0 / 132 - r2 * (691.0 / 32760))))));
}

double student_t_log_pdf(double nu, double x) {
  if (!(nu > 0.0)) throw DomainError("student_t_log_pdf: nu must be positive");
  return -log_beta(0.5 * nu, 0.5) - 0.5 * std::log(nu) - 0.5 * (nu + 1.0) * std::log1p(x * x / nu);
}

double student_t_upper_tail(double nu, double x) {
  if (x < 0.0) return 1.0 - student_t_upper_tail(nu, -x);
  if (x == 0.0) return 0.5;
  if (x > 1e100) {
    const double w = nu / x / x;
    return 0.5 * incomplete_beta(0.5 * nu, 0.5, w, 1.0 - w);
  }
  const double x2 = x * x;
  const double log_w = -std::log1p(x2 / nu);
  const double log_wc = -std::log1p(nu / x2);
  return 0.5 * incomplete_beta_with_logs(0.5 * nu, 0.5, nu / (nu + x2), x2 / (nu + x2), log_w, log_wc);
}

double student_t_cdf(double nu, double x) {
  if (!(nu > 0.0)) throw DomainError("student_t_cdf: nu must be positive");
  if (std::isnan(x)) throw DomainError("student_t_cdf: x is NaN");
  return x < 0.0 ? student_t_upper_tail(nu, -x) : 1.0 - student_t_upper_tail(nu, x);
}

double student_t_quantile(double nu, double p) {
  if (!(nu > 0.0)) throw DomainError("student_t_quantile: nu must be positive");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("student_t_quantile: p must lie in (0,1)");
  if (p == 0.5) return 0.0;
  if (nu == 1.0) return p < 0.5 ? -1.0 / tan_pi(p) : 1.0 / tan_pi(1.0 - p);
  if (nu == 2.0) return (2.0 * p - 1.0) / std::sqrt(2.0 * p * (1.0 - p));

  // Solve upper_tail(t) = tail on t > 0 and reflect for the lower half.
  const bool lower = p < 0.5;
  const double tail = lower ? p : 1.0 - p;

  double lo = 0.0;
  double hi = 1.0;
  while (student_t_upper_tail(nu, hi) > tail) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NumericError("student_t_quantile: bracket overflow", {nu, p});
  }

  double t = -normal_quantile(tail);
  if (!(t > lo && t < hi)) t = 0.5 * (lo + hi);
  for (int iter = 0; iter < 500; ++iter) {
    const double resid = student_t_upper_tail(nu, t) - tail;
    if (resid > 0.0) {
      lo = t;
    } else if (resid < 0.0) {
      hi = t;
    } else {
      break;
    }
    const double density = std::exp(student_t_log_pdf(nu, t));
    double next = t + resid / density;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::fabs(next - t);
    t = next;
    if (step <= 2.0 * kEps * t || hi - lo <= 2.0 * kEps * hi) break;
  }
  return lower ? -t : t;
}

}  // namespace qmatch::special
