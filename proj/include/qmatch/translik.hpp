#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qmatch/linmodel.hpp"
#include "qmatch/percentile.hpp"
#include "qmatch/target_distribution.hpp"

namespace qmatch {

/// Profile log likelihood of a quantile-matching transformation with the
/// target-independent sum of log pc'(y_i) left out:
///   det_term      = -1/2 log det Sigma_hat_G
///   jacobian_term = sum_i log Q'(pc(y_i)) = -sum_i log g(G^-1(pc(y_i)))
///   value         = det_term + jacobian_term
struct ReducedProfileLoglik {
  std::string target;
  ModelKind model = ModelKind::fixed_effects;
  double det_term = 0.0;
  double jacobian_term = 0.0;
  double value = 0.0;
  ModelFit fit;
};

ReducedProfileLoglik reduced_profile_loglik(std::span<const double> y, const TargetDistribution& dist,
                                            const DesignSpec& design);
ReducedProfileLoglik reduced_profile_loglik(const PercentileVector& pc, const TargetDistribution& dist,
                                            const DesignSpec& design);

/// Log likelihood ratio of target a against target b; positive favours a.
double loglik_ratio(std::span<const double> y, const TargetDistribution& a,
                    const TargetDistribution& b, const DesignSpec& design);

/// Exact Gaussian-versus-uniform ratio split into its two terms, next to the
/// first-order predictions -(n/2) log 12 and (n/2)(1 + log 2 pi).
struct GaussianUniformDiagnostics {
  std::size_t n = 0;
  double lr = 0.0;
  double det_term = 0.0;
  double det_prediction = 0.0;
  double correction_term = 0.0;
  double correction_prediction = 0.0;
};
GaussianUniformDiagnostics lr_diagnostics_gaussian_uniform(std::span<const double> y,
                                                           const DesignSpec& design);

/// Logistic-versus-uniform ratio and its approximation det_term + 2n.
struct LogisticUniformDiagnostics {
  std::size_t n = 0;
  double lr = 0.0;
  double det_term = 0.0;
  double jacobian_term = 0.0;
  double approximation = 0.0;
};
LogisticUniformDiagnostics lr_diagnostics_logistic_uniform(std::span<const double> y,
                                                           const DesignSpec& design);

enum class ProfileFamily { student_t, alpha_beta_diagonal, boxcox };

std::string to_string(ProfileFamily family);

struct ProfilePoint {
  double param = 0.0;
  bool ok = false;
  double value = 0.0;
  double det_term = 0.0;
  double jacobian_term = 0.0;
  std::string error;  ///< Reason for failure when !ok.
};

/// Profile over a one-parameter family. `points` follows the ascending grid;
/// failed points stay in place with ok == false. argmax_value is the largest
/// successful grid value, or the refined value when refinement found better.
struct ProfileCurve {
  ProfileFamily family = ProfileFamily::student_t;
  ModelKind model = ModelKind::fixed_effects;
  std::vector<ProfilePoint> points;
  double argmax_param = 0.0;
  double argmax_value = 0.0;
  bool refined = false;

  std::size_t failures() const;
};

struct ProfileOptions {
  bool refine = false;
  double refine_tolerance = 1e-3;
  /// Worker threads for grid evaluation; 0 picks hardware concurrency.
  unsigned threads = 0;
};

/// inv_nu in {0, 0.02, ..., 1}.
std::vector<double> default_inv_nu_grid();
/// alpha in {-1, -0.99, ..., 1}.
std::vector<double> default_alpha_grid();
/// g in {-1, -0.95, ..., 1}.
std::vector<double> default_boxcox_grid();

/// Evenly spaced grid lo, lo + step, ..., hi (hi included up to rounding).
std::vector<double> linear_grid(double lo, double hi, double step);

/// Reduced profile over the t family indexed by inv_nu = 1/nu in [0, 1];
/// inv_nu = 0 is the Gaussian.
ProfileCurve profile_student_t(std::span<const double> y, const DesignSpec& design,
                               std::span<const double> grid, const ProfileOptions& options = {});

/// Reduced profile over the alpha = beta diagonal of the alpha-beta family;
/// alpha = 0 is the logistic.
ProfileCurve profile_alpha(std::span<const double> y, const DesignSpec& design,
                           std::span<const double> grid, const ProfileOptions& options = {});

/// Box-Cox profile -1/2 log det Sigma_hat_g + (g - 1) sum log y_i for the
/// power transformation (y^g - 1)/g, log at g = 0. Requires y > 0.
ProfileCurve boxcox_profile(std::span<const double> y, const DesignSpec& design,
                            std::span<const double> grid, const ProfileOptions& options = {});

/// Quadrature (1/n) sum log Q'((2i-1)/2n) of the entropy -int log g dG.
struct EntropyQuadrature {
  std::size_t n = 0;
  double quadrature = 0.0;
  std::optional<double> exact;
  std::optional<double> gap;  ///< quadrature - exact
};
EntropyQuadrature entropy_quadrature(const TargetDistribution& dist, std::size_t n);

/// Closed-form differential entropy where one is available.
std::optional<double> exact_entropy(const TargetDistribution& dist);

double pearson_correlation(std::span<const double> a, std::span<const double> b);

/// Pearson correlation of y with each of its quantile-matched versions.
std::vector<double> correlation_report(std::span<const double> y,
                                       std::span<const TargetDistribution> dists);

}  // namespace qmatch
