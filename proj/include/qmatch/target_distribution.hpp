#pragma once

#include <string>

namespace qmatch {

enum class TargetKind { gaussian, uniform, logistic, student_t, alpha_beta };

/// Reciprocal degrees of freedom of the t family, in [0, 1]. Zero is the
/// Gaussian limit, one is the Cauchy.
struct TFamilyParam {
  double inv_nu = 0.0;
};

/// Exponents of the quantile family q(p) = p^alpha/alpha - (1-p)^beta/beta,
/// each restricted to [-1, 1].
struct AlphaBetaParam {
  double alpha = 0.0;
  double beta = 0.0;
};

struct QuantilePoint {
  double value = 0.0;
  double log_derivative = 0.0;
};

/// Target law G for quantile matching, held through its quantile function
/// Q = G^-1 and log Q'(p) = -log g(Q(p)). Immutable once built.
///
/// The alpha-beta family uses the shifted form (p^a - 1)/a - ((1-p)^b - 1)/b,
/// whose a -> 0 and b -> 0 limits are log p and -log(1-p); a = b = 0 is the
/// logistic. Any member may carry an outer affine map x -> shift + scale * x.
class TargetDistribution {
 public:
  static TargetDistribution gaussian();
  static TargetDistribution uniform();
  static TargetDistribution logistic();
  static TargetDistribution student_t(TFamilyParam param);
  static TargetDistribution student_t_inv_nu(double inv_nu) { return student_t({inv_nu}); }
  static TargetDistribution alpha_beta(AlphaBetaParam param);
  static TargetDistribution alpha_beta(double alpha, double beta) { return alpha_beta({alpha, beta}); }

  /// The target shift + scale * G. scale must be nonzero; a negative scale
  /// reverses the order of the transformed values.
  TargetDistribution affine(double shift, double scale) const;

  TargetKind kind() const noexcept { return kind_; }
  double inv_nu() const noexcept { return inv_nu_; }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  double shift() const noexcept { return shift_; }
  double scale() const noexcept { return scale_; }

  double quantile(double p) const;
  double log_quantile_derivative(double p) const;

  /// True for gaussian, uniform, logistic and student_t.
  bool has_cdf() const noexcept { return kind_ != TargetKind::alpha_beta; }
  double cdf(double x) const;

  /// Quantile and log-quantile-derivative together, sharing the inversion.
  QuantilePoint evaluate(double p) const;

  /// Short label such as "gaussian", "t:inv_nu=0.15" or "alpha:a=-0.05,b=-0.05".
  std::string label() const;

 private:
  TargetDistribution(TargetKind kind) : kind_(kind) {}

  double base_quantile(double p) const;
  double base_log_quantile_derivative(double p, double base_q) const;
  bool log_derivative_needs_quantile() const noexcept;

  TargetKind kind_;
  double inv_nu_ = 0.0;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  double shift_ = 0.0;
  double scale_ = 1.0;
};

/// log f_t(x) for the t distribution with nu = 1/inv_nu, inv_nu in (0, 1].
double student_t_log_density(double inv_nu, double x);

}  // namespace qmatch
