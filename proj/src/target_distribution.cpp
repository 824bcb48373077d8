#include "qmatch/target_distribution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qmatch/errors.hpp"
#include "qmatch/special_functions.hpp"

namespace qmatch {

namespace {

void check_probability(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    std::ostringstream msg;
    msg << "probability " << p << " outside (0,1)";
    throw DomainError(msg.str());
  }
}

// (p^a - 1)/a with its a -> 0 limit, given log p.
double shifted_power(double log_p, double a) {
  if (a == 0.0) return log_p;
  return std::expm1(a * log_p) / a;
}

double log_add_exp(double a, double b) {
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

std::string format_number(double v) {
  std::ostringstream out;
  out.precision(10);
  out << v;
  return out.str();
}

}  // namespace

TargetDistribution TargetDistribution::gaussian() { return TargetDistribution(TargetKind::gaussian); }
TargetDistribution TargetDistribution::uniform() { return TargetDistribution(TargetKind::uniform); }
TargetDistribution TargetDistribution::logistic() { return TargetDistribution(TargetKind::logistic); }

TargetDistribution TargetDistribution::student_t(TFamilyParam param) {
  if (!(param.inv_nu >= 0.0 && param.inv_nu <= 1.0)) {
    throw DomainError("t family: inv_nu must lie in [0,1], got " + format_number(param.inv_nu));
  }
  TargetDistribution d(TargetKind::student_t);
  d.inv_nu_ = param.inv_nu;
  return d;
}

TargetDistribution TargetDistribution::alpha_beta(AlphaBetaParam param) {
  auto in_range = [](double v) { return v >= -1.0 && v <= 1.0; };
  if (!in_range(param.alpha) || !in_range(param.beta)) {
    throw DomainError("alpha-beta family: alpha and beta must lie in [-1,1]");
  }
  TargetDistribution d(TargetKind::alpha_beta);
  d.alpha_ = param.alpha;
  d.beta_ = param.beta;
  return d;
}

TargetDistribution TargetDistribution::affine(double shift, double scale) const {
  if (!(scale != 0.0 && std::isfinite(scale) && std::isfinite(shift))) {
    throw DomainError("affine target: scale must be finite and nonzero");
  }
  TargetDistribution d = *this;
  d.shift_ = shift + scale * shift_;
  d.scale_ = scale * scale_;
  return d;
}

double TargetDistribution::base_quantile(double p) const {
  switch (kind_) {
    case TargetKind::gaussian:
      return special::normal_quantile(p);
    case TargetKind::uniform:
      return p;
    case TargetKind::logistic:
      return std::log(p) - std::log1p(-p);
    case TargetKind::student_t:
      if (inv_nu_ == 0.0) return special::normal_quantile(p);
      return special::student_t_quantile(1.0 / inv_nu_, p);
    case TargetKind::alpha_beta:
      if (alpha_ == 0.0 && beta_ == 0.0) return std::log(p) - std::log1p(-p);
      return shifted_power(std::log(p), alpha_) - shifted_power(std::log1p(-p), beta_);
  }
  return 0.0;
}

double TargetDistribution::base_log_quantile_derivative(double p, double q) const {
  switch (kind_) {
    case TargetKind::uniform:
      return 0.0;
    case TargetKind::logistic:
      return -std::log(p) - std::log1p(-p);
    case TargetKind::gaussian:
      return 0.5 * q * q + 0.5 * special::kLogTwoPi;
    case TargetKind::student_t:
      if (inv_nu_ == 0.0) return 0.5 * q * q + 0.5 * special::kLogTwoPi;
      return -special::student_t_log_pdf(1.0 / inv_nu_, q);
    case TargetKind::alpha_beta:
      if (alpha_ == 0.0 && beta_ == 0.0) return -std::log(p) - std::log1p(-p);
      return log_add_exp((alpha_ - 1.0) * std::log(p), (beta_ - 1.0) * std::log1p(-p));
  }
  return 0.0;
}

bool TargetDistribution::log_derivative_needs_quantile() const noexcept {
  return kind_ == TargetKind::gaussian || kind_ == TargetKind::student_t;
}

double TargetDistribution::quantile(double p) const {
  check_probability(p);
  const double q = base_quantile(p);
  if (shift_ == 0.0 && scale_ == 1.0) return q;
  return shift_ + scale_ * q;
}

double TargetDistribution::log_quantile_derivative(double p) const {
  check_probability(p);
  const double q = log_derivative_needs_quantile() ? base_quantile(p) : 0.0;
  const double d = base_log_quantile_derivative(p, q);
  if (scale_ == 1.0) return d;
  return d + std::log(std::fabs(scale_));
}

QuantilePoint TargetDistribution::evaluate(double p) const {
  check_probability(p);
  const double q = base_quantile(p);
  QuantilePoint out;
  out.value = (shift_ == 0.0 && scale_ == 1.0) ? q : shift_ + scale_ * q;
  out.log_derivative = base_log_quantile_derivative(p, q);
  if (scale_ != 1.0) out.log_derivative += std::log(std::fabs(scale_));
  return out;
}

double TargetDistribution::cdf(double x) const {
  if (std::isnan(x)) throw DomainError("cdf: x is NaN");
  double u = (x - shift_) / scale_;
  double f = 0.0;
  switch (kind_) {
    case TargetKind::gaussian:
      f = special::normal_cdf(u);
      break;
    case TargetKind::uniform:
      f = std::clamp(u, 0.0, 1.0);
      break;
    case TargetKind::logistic:
      f = 1.0 / (1.0 + std::exp(-u));
      break;
    case TargetKind::student_t:
      f = inv_nu_ == 0.0 ? special::normal_cdf(u) : special::student_t_cdf(1.0 / inv_nu_, u);
      break;
    case TargetKind::alpha_beta:
      throw DomainError("cdf: the alpha-beta family has no closed-form distribution function");
  }
  return scale_ > 0.0 ? f : 1.0 - f;
}

std::string TargetDistribution::label() const {
  std::string base;
  switch (kind_) {
    case TargetKind::gaussian:
      base = "gaussian";
      break;
    case TargetKind::uniform:
      base = "uniform";
      break;
    case TargetKind::logistic:
      base = "logistic";
      break;
    case TargetKind::student_t:
      base = "t:inv_nu=" + format_number(inv_nu_);
      break;
    case TargetKind::alpha_beta:
      base = "alpha:a=" + format_number(alpha_) + ",b=" + format_number(beta_);
      break;
  }
  if (shift_ != 0.0 || scale_ != 1.0) {
    base += "@affine(" + format_number(shift_) + "," + format_number(scale_) + ")";
  }
  return base;
}

double student_t_log_density(double inv_nu, double x) {
  if (!(inv_nu > 0.0)) throw DomainError("student_t_log_density: inv_nu must be positive");
  return special::student_t_log_pdf(1.0 / inv_nu, x);
}

}  // namespace qmatch
