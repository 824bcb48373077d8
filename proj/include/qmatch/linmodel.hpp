#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qmatch {

/// fixed_effects: mean space row + col, Sigma = sigma2 * I.
/// random_effects: mean space 1, Sigma = sigma2 I + sigma2_row ROW + sigma2_col COL
/// where ROW and COL are the same-row and same-column block indicator matrices.
enum class ModelKind { fixed_effects, random_effects };

struct Cell {
  std::size_t row = 0;
  std::size_t col = 0;
};

/// Balanced replicate-1 row-column layout. The default layout is column-major,
/// observation k sitting in row k % nrows and column k / nrows.
class DesignSpec {
 public:
  DesignSpec(std::size_t nrows, std::size_t ncols, ModelKind model = ModelKind::fixed_effects);
  /// Explicit layout; every (row, col) cell must appear exactly once.
  DesignSpec(std::size_t nrows, std::size_t ncols, std::vector<Cell> layout, ModelKind model);

  std::size_t nrows() const noexcept { return nrows_; }
  std::size_t ncols() const noexcept { return ncols_; }
  std::size_t size() const noexcept { return nrows_ * ncols_; }
  ModelKind model() const noexcept { return model_; }
  const Cell& cell(std::size_t k) const { return layout_[k]; }
  const std::vector<Cell>& layout() const noexcept { return layout_; }

  DesignSpec with_model(ModelKind model) const;

 private:
  std::size_t nrows_;
  std::size_t ncols_;
  std::vector<Cell> layout_;
  ModelKind model_;
};

/// Squared norms of the projections of z onto the row-contrast, column-contrast
/// and interaction subspaces of the balanced design.
struct ProjectionDecomposition {
  std::size_t nrows = 0;
  std::size_t ncols = 0;
  double grand_mean = 0.0;
  std::vector<double> row_means;
  std::vector<double> col_means;
  double s_row = 0.0;
  double s_col = 0.0;
  double s_error = 0.0;
  double s_mean = 0.0;  ///< n * grand_mean^2, the mean-direction component.

  std::size_t n() const noexcept { return nrows * ncols; }
  std::size_t d_row() const noexcept { return nrows - 1; }
  std::size_t d_col() const noexcept { return ncols - 1; }
  std::size_t d_error() const noexcept { return (nrows - 1) * (ncols - 1); }
  double total() const noexcept { return s_row + s_col + s_error; }
};

struct VarianceComponents {
  double sigma2 = 0.0;
  double sigma2_row = 0.0;
  double sigma2_col = 0.0;
};

/// Eigenvalues of Sigma = sigma2 I + sigma2_row ROW + sigma2_col COL on the
/// mean, row-contrast, column-contrast and interaction subspaces.
struct CovarianceEigenvalues {
  double mean = 0.0;
  double row = 0.0;
  double col = 0.0;
  double error = 0.0;
};

CovarianceEigenvalues covariance_eigenvalues(const VarianceComponents& vc, std::size_t nrows,
                                             std::size_t ncols);

struct ModelFit {
  ModelKind kind = ModelKind::fixed_effects;
  VarianceComponents params;  ///< sigma2_row = sigma2_col = 0 for fixed effects.
  CovarianceEigenvalues eigen;
  double log_det_sigma_hat = 0.0;
  std::vector<double> mu_hat;
  double max_loglik_core = 0.0;  ///< Gaussian log likelihood at the MLE, no Jacobian.

  /// Same fit with Sigma multiplied by `factor`.
  ModelFit with_scaled_covariance(double factor) const;
};

ProjectionDecomposition decompose(std::span<const double> z, const DesignSpec& design);

/// Gaussian log likelihood of the random-effects model at the given
/// components, with the mean profiled out (mu = grand mean).
double random_effects_loglik(const ProjectionDecomposition& dec, const VarianceComponents& vc);

/// Fixed-effects log likelihood at residual variance sigma2, mean profiled out.
double fixed_effects_loglik(const ProjectionDecomposition& dec, double sigma2);

/// ML fit of the additive row + col model with Sigma = sigma2 I.
/// Throws DegenerateFitError when the interaction sum of squares is zero.
ModelFit fit_fixed(std::span<const double> z, const DesignSpec& design);

/// Separable ANOVA solution lambda_k = S_k / d_k, projected to the feasible
/// cone. Ignores the coupling through the mean eigenvalue.
VarianceComponents anova_random_estimates(const ProjectionDecomposition& dec);

/// Exact ML fit of the balanced random-effects model. Every active set of the
/// two nonnegativity constraints is solved; the interior set by Newton from
/// the ANOVA start.
ModelFit fit_random_balanced(std::span<const double> z, const DesignSpec& design);

/// Same contract as fit_random_balanced through a derivative-free simplex
/// search with restarts. Used as an independent check.
ModelFit fit_random_numeric(std::span<const double> z, const DesignSpec& design);

/// Dispatches on design.model().
ModelFit fit_model(std::span<const double> z, const DesignSpec& design);

/// (z - mu_hat)' Sigma_hat^-1 (z - mu_hat), evaluated in the eigenbasis.
double quadratic_form(std::span<const double> z, const ModelFit& fit, const DesignSpec& design);

}  // namespace qmatch
