#include "qmatch/linmodel.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "nelder_mead.hpp"
#include "qmatch/errors.hpp"
#include "qmatch/special_functions.hpp"

namespace qmatch {

namespace {

constexpr double kDegenerateRelTol = 1e-13;

void check_design_size(std::span<const double> z, const DesignSpec& design) {
  if (z.size() != design.size()) {
    std::ostringstream msg;
    msg << "response has " << z.size() << " values but the design has " << design.nrows() << "x"
        << design.ncols() << " cells";
    throw DomainError(msg.str());
  }
}

void check_fittable(const DesignSpec& design) {
  if (design.nrows() < 2 || design.ncols() < 2) {
    throw DomainError("model fitting needs at least 2 rows and 2 columns");
  }
}

void check_not_additive(const ProjectionDecomposition& dec) {
  if (!(dec.s_error > kDegenerateRelTol * dec.total())) {
    throw DegenerateFitError(
        "transformed response is exactly additive (zero interaction sum of squares); "
        "the likelihood is unbounded");
  }
}

// Minus twice the profiled random-effects log likelihood, less n log(2 pi),
// as a function of the eigenvalues.
double random_objective(const ProjectionDecomposition& dec, const CovarianceEigenvalues& ev) {
  return std::log(ev.mean) + static_cast<double>(dec.d_row()) * std::log(ev.row) +
         dec.s_row / ev.row + static_cast<double>(dec.d_col()) * std::log(ev.col) +
         dec.s_col / ev.col + static_cast<double>(dec.d_error()) * std::log(ev.error) +
         dec.s_error / ev.error;
}

VarianceComponents components_from_eigen(const CovarianceEigenvalues& ev, std::size_t nrows,
                                         std::size_t ncols) {
  VarianceComponents vc;
  vc.sigma2 = ev.error;
  vc.sigma2_row = (ev.row - ev.error) / static_cast<double>(ncols);
  vc.sigma2_col = (ev.col - ev.error) / static_cast<double>(nrows);
  return vc;
}

double log_det_from_eigen(const ProjectionDecomposition& dec, const CovarianceEigenvalues& ev) {
  return std::log(ev.mean) + static_cast<double>(dec.d_row()) * std::log(ev.row) +
         static_cast<double>(dec.d_col()) * std::log(ev.col) +
         static_cast<double>(dec.d_error()) * std::log(ev.error);
}

struct NewtonOutcome {
  CovarianceEigenvalues eigen;
  double grad_norm = 0.0;
  bool converged = false;
};

// Unconstrained Newton on u = log(lambda_error, lambda_row, lambda_col) for
// f(u) = log(lambda_row + lambda_col - lambda_error) + sum_k d_k u_k + S_k exp(-u_k).
NewtonOutcome newton_interior(const ProjectionDecomposition& dec, Eigen::Vector3d u) {
  const Eigen::Vector3d d(static_cast<double>(dec.d_error()), static_cast<double>(dec.d_row()),
                          static_cast<double>(dec.d_col()));
  const Eigen::Vector3d s(dec.s_error, dec.s_row, dec.s_col);
  const Eigen::Vector3d sign(-1.0, 1.0, 1.0);

  auto lambda0 = [](const Eigen::Vector3d& v) {
    return std::exp(v[1]) + std::exp(v[2]) - std::exp(v[0]);
  };
  auto objective = [&](const Eigen::Vector3d& v) {
    const double l0 = lambda0(v);
    if (!(l0 > 0.0)) return std::numeric_limits<double>::infinity();
    double f = std::log(l0);
    for (int k = 0; k < 3; ++k) f += d[k] * v[k] + s[k] * std::exp(-v[k]);
    return f;
  };

  constexpr double kGradTol = 1e-10;
  constexpr int kMaxIter = 200;
  NewtonOutcome out;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    const double l0 = lambda0(u);
    const Eigen::Vector3d lam = u.array().exp();
    Eigen::Vector3d grad;
    Eigen::Matrix3d hess;
    for (int j = 0; j < 3; ++j) {
      grad[j] = sign[j] * lam[j] / l0 + d[j] - s[j] / lam[j];
      for (int k = 0; k < 3; ++k) {
        hess(j, k) = -sign[j] * sign[k] * lam[j] * lam[k] / (l0 * l0);
      }
      hess(j, j) += sign[j] * lam[j] / l0 + s[j] / lam[j];
    }
    out.grad_norm = grad.norm();
    if (out.grad_norm < kGradTol) {
      out.converged = true;
      break;
    }

    Eigen::Vector3d step;
    double damping = 0.0;
    for (;;) {
      Eigen::Matrix3d h = hess;
      h.diagonal().array() += damping;
      Eigen::LLT<Eigen::Matrix3d> llt(h);
      if (llt.info() == Eigen::Success) {
        step = -llt.solve(grad);
        break;
      }
      damping = damping == 0.0 ? 1e-6 * (1.0 + hess.diagonal().cwiseAbs().maxCoeff()) : damping * 10.0;
    }

    const double f0 = objective(u);
    const double slope = grad.dot(step);
    // Once the predicted decrease is below the rounding level of f, Armijo
    // cannot discriminate; accept the full step unless f clearly rises.
    const double noise = 1e-12 * (1.0 + std::fabs(f0));
    double t = 1.0;
    Eigen::Vector3d next = u + step;
    if (-slope < 1e2 * noise) {
      if (!(objective(next) <= f0 + noise)) break;
    } else {
      while (t > 1e-12) {
        next = u + t * step;
        if (objective(next) <= f0 + 1e-4 * t * slope) break;
        t *= 0.5;
      }
      if (t <= 1e-12) break;
    }
    if ((next - u).norm() < 1e-15) {
      u = next;
      out.converged = out.grad_norm < 1e-8;
      break;
    }
    u = next;
  }
  const Eigen::Vector3d lam = u.array().exp();
  out.eigen.error = lam[0];
  out.eigen.row = lam[1];
  out.eigen.col = lam[2];
  out.eigen.mean = lam[1] + lam[2] - lam[0];
  return out;
}

ModelFit assemble_random_fit(const ProjectionDecomposition& dec, const CovarianceEigenvalues& ev) {
  ModelFit fit;
  fit.kind = ModelKind::random_effects;
  fit.eigen = ev;
  fit.params = components_from_eigen(ev, dec.nrows, dec.ncols);
  fit.params.sigma2_row = std::max(fit.params.sigma2_row, 0.0);
  fit.params.sigma2_col = std::max(fit.params.sigma2_col, 0.0);
  fit.log_det_sigma_hat = log_det_from_eigen(dec, ev);
  fit.mu_hat.assign(dec.n(), dec.grand_mean);
  fit.max_loglik_core = random_effects_loglik(dec, fit.params);
  return fit;
}

}  // namespace

DesignSpec::DesignSpec(std::size_t nrows, std::size_t ncols, ModelKind model)
    : nrows_(nrows), ncols_(ncols), model_(model) {
  if (nrows == 0 || ncols == 0) throw DomainError("design needs at least one row and one column");
  layout_.resize(nrows * ncols);
  for (std::size_t k = 0; k < layout_.size(); ++k) layout_[k] = {k % nrows, k / nrows};
}

DesignSpec::DesignSpec(std::size_t nrows, std::size_t ncols, std::vector<Cell> layout,
                       ModelKind model)
    : nrows_(nrows), ncols_(ncols), layout_(std::move(layout)), model_(model) {
  if (nrows == 0 || ncols == 0) throw DomainError("design needs at least one row and one column");
  if (layout_.size() != nrows * ncols) {
    throw DomainError("layout size does not match nrows * ncols (replicate-1 balanced design)");
  }
  std::vector<char> seen(nrows * ncols, 0);
  for (const Cell& c : layout_) {
    if (c.row >= nrows || c.col >= ncols) throw DomainError("layout cell outside the design");
    char& flag = seen[c.col * nrows + c.row];
    if (flag) throw DomainError("layout repeats a (row, col) cell; design is not balanced");
    flag = 1;
  }
}

DesignSpec DesignSpec::with_model(ModelKind model) const {
  DesignSpec copy = *this;
  copy.model_ = model;
  return copy;
}

CovarianceEigenvalues covariance_eigenvalues(const VarianceComponents& vc, std::size_t nrows,
                                             std::size_t ncols) {
  const double r = static_cast<double>(nrows);
  const double c = static_cast<double>(ncols);
  CovarianceEigenvalues ev;
  ev.error = vc.sigma2;
  ev.row = vc.sigma2 + c * vc.sigma2_row;
  ev.col = vc.sigma2 + r * vc.sigma2_col;
  ev.mean = vc.sigma2 + c * vc.sigma2_row + r * vc.sigma2_col;
  return ev;
}

ModelFit ModelFit::with_scaled_covariance(double factor) const {
  ModelFit out = *this;
  out.params.sigma2 *= factor;
  out.params.sigma2_row *= factor;
  out.params.sigma2_col *= factor;
  out.eigen.mean *= factor;
  out.eigen.row *= factor;
  out.eigen.col *= factor;
  out.eigen.error *= factor;
  out.log_det_sigma_hat += static_cast<double>(mu_hat.size()) * std::log(factor);
  return out;
}

ProjectionDecomposition decompose(std::span<const double> z, const DesignSpec& design) {
  check_design_size(z, design);
  const std::size_t r = design.nrows();
  const std::size_t c = design.ncols();
  ProjectionDecomposition dec;
  dec.nrows = r;
  dec.ncols = c;
  dec.row_means.assign(r, 0.0);
  dec.col_means.assign(c, 0.0);
  double sum = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    const Cell& cell = design.cell(k);
    dec.row_means[cell.row] += z[k];
    dec.col_means[cell.col] += z[k];
    sum += z[k];
  }
  const double n = static_cast<double>(r * c);
  dec.grand_mean = sum / n;
  for (double& m : dec.row_means) m /= static_cast<double>(c);
  for (double& m : dec.col_means) m /= static_cast<double>(r);

  for (double m : dec.row_means) dec.s_row += (m - dec.grand_mean) * (m - dec.grand_mean);
  dec.s_row *= static_cast<double>(c);
  for (double m : dec.col_means) dec.s_col += (m - dec.grand_mean) * (m - dec.grand_mean);
  dec.s_col *= static_cast<double>(r);
  for (std::size_t k = 0; k < z.size(); ++k) {
    const Cell& cell = design.cell(k);
    const double e = z[k] - dec.row_means[cell.row] - dec.col_means[cell.col] + dec.grand_mean;
    dec.s_error += e * e;
  }
  dec.s_mean = n * dec.grand_mean * dec.grand_mean;
  return dec;
}

double random_effects_loglik(const ProjectionDecomposition& dec, const VarianceComponents& vc) {
  const auto ev = covariance_eigenvalues(vc, dec.nrows, dec.ncols);
  if (!(ev.error > 0.0 && ev.row > 0.0 && ev.col > 0.0 && ev.mean > 0.0)) {
    return -std::numeric_limits<double>::infinity();
  }
  const double n = static_cast<double>(dec.n());
  return -0.5 * (n * special::kLogTwoPi + random_objective(dec, ev));
}

double fixed_effects_loglik(const ProjectionDecomposition& dec, double sigma2) {
  if (!(sigma2 > 0.0)) return -std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(dec.n());
  return -0.5 * (n * special::kLogTwoPi + n * std::log(sigma2) + dec.s_error / sigma2);
}

ModelFit fit_fixed(std::span<const double> z, const DesignSpec& design) {
  check_fittable(design);
  const ProjectionDecomposition dec = decompose(z, design);
  check_not_additive(dec);
  const double n = static_cast<double>(dec.n());

  ModelFit fit;
  fit.kind = ModelKind::fixed_effects;
  fit.params.sigma2 = dec.s_error / n;
  fit.eigen = covariance_eigenvalues(fit.params, dec.nrows, dec.ncols);
  fit.log_det_sigma_hat = n * std::log(fit.params.sigma2);
  fit.mu_hat.resize(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) {
    const Cell& cell = design.cell(k);
    fit.mu_hat[k] = dec.row_means[cell.row] + dec.col_means[cell.col] - dec.grand_mean;
  }
  fit.max_loglik_core = -0.5 * n * (std::log(fit.params.sigma2) + 1.0 + special::kLogTwoPi);
  return fit;
}

VarianceComponents anova_random_estimates(const ProjectionDecomposition& dec) {
  const double err = dec.s_error / static_cast<double>(dec.d_error());
  CovarianceEigenvalues ev;
  ev.error = err;
  ev.row = std::max(dec.s_row / static_cast<double>(dec.d_row()), err);
  ev.col = std::max(dec.s_col / static_cast<double>(dec.d_col()), err);
  ev.mean = ev.row + ev.col - ev.error;
  return components_from_eigen(ev, dec.nrows, dec.ncols);
}

ModelFit fit_random_balanced(std::span<const double> z, const DesignSpec& design) {
  check_fittable(design);
  const ProjectionDecomposition dec = decompose(z, design);
  check_not_additive(dec);

  const double d_row = static_cast<double>(dec.d_row());
  const double d_col = static_cast<double>(dec.d_col());
  const double d_err = static_cast<double>(dec.d_error());
  const double n = static_cast<double>(dec.n());

  std::optional<CovarianceEigenvalues> best;
  double best_obj = std::numeric_limits<double>::infinity();
  auto consider = [&](const CovarianceEigenvalues& ev) {
    const double obj = random_objective(dec, ev);
    if (obj < best_obj) {
      best_obj = obj;
      best = ev;
    }
  };

  // sigma2_row = sigma2_col = 0: Sigma = sigma2 I.
  {
    const double v = dec.total() / n;
    consider({v, v, v, v});
  }
  // sigma2_row = 0: lambda_row = lambda_error, lambda_mean = lambda_col.
  {
    const double e = (dec.s_row + dec.s_error) / (d_row + d_err);
    const double lc = dec.s_col / (d_col + 1.0);
    if (lc >= e) consider({lc, e, lc, e});
  }
  // sigma2_col = 0.
  {
    const double e = (dec.s_col + dec.s_error) / (d_col + d_err);
    const double lr = dec.s_row / (d_row + 1.0);
    if (lr >= e) consider({lr, lr, e, e});
  }
  // Interior, started from the separable solution nudged inside the cone.
  {
    const double e = dec.s_error / d_err;
    const double lr = std::max(dec.s_row / d_row, 1.001 * e);
    const double lc = std::max(dec.s_col / d_col, 1.001 * e);
    const NewtonOutcome outcome =
        newton_interior(dec, Eigen::Vector3d(std::log(e), std::log(lr), std::log(lc)));
    const auto& ev = outcome.eigen;
    const bool feasible = ev.row > ev.error && ev.col > ev.error && ev.mean > 0.0;
    if (feasible) {
      if (!outcome.converged && random_objective(dec, ev) < best_obj) {
        const auto vc = components_from_eigen(ev, dec.nrows, dec.ncols);
        throw NumericError("random-effects Newton iteration did not converge",
                           {vc.sigma2, vc.sigma2_row, vc.sigma2_col});
      }
      if (outcome.converged) consider(ev);
    }
  }
  return assemble_random_fit(dec, *best);
}

ModelFit fit_random_numeric(std::span<const double> z, const DesignSpec& design) {
  check_fittable(design);
  const ProjectionDecomposition dec = decompose(z, design);
  check_not_additive(dec);

  // x = (log(sigma2 / v), sqrt(sigma2_row / v), sqrt(sigma2_col / v)).
  const double v = dec.total() / static_cast<double>(dec.n());
  auto to_components = [v](const std::array<double, 3>& x) {
    return VarianceComponents{v * std::exp(x[0]), v * x[1] * x[1], v * x[2] * x[2]};
  };
  const std::function<double(const std::array<double, 3>&)> objective =
      [&](const std::array<double, 3>& x) {
        return -random_effects_loglik(dec, to_components(x));
      };

  std::array<double, 3> x{0.0, 0.5, 0.5};
  double previous = std::numeric_limits<double>::infinity();
  constexpr int kMaxRestarts = 60;
  for (int restart = 0; restart < kMaxRestarts; ++restart) {
    const double step = restart == 0 ? 0.5 : 0.05;
    const auto result = detail::nelder_mead<3>(objective, x, step, 1e-15, 20000);
    x = result.x;
    if (std::fabs(previous - result.value) <= 1e-12 * (1.0 + std::fabs(result.value))) {
      return assemble_random_fit(dec, covariance_eigenvalues(to_components(x), dec.nrows, dec.ncols));
    }
    previous = result.value;
  }
  const auto vc = to_components(x);
  throw NumericError("simplex search for random-effects fit did not settle",
                     {vc.sigma2, vc.sigma2_row, vc.sigma2_col});
}

ModelFit fit_model(std::span<const double> z, const DesignSpec& design) {
  return design.model() == ModelKind::fixed_effects ? fit_fixed(z, design)
                                                    : fit_random_balanced(z, design);
}

double quadratic_form(std::span<const double> z, const ModelFit& fit, const DesignSpec& design) {
  check_design_size(z, design);
  if (fit.mu_hat.size() != z.size()) throw DomainError("fit does not match the response length");
  const auto& ev = fit.eigen;
  if (!(ev.mean > 0.0 && ev.row > 0.0 && ev.col > 0.0 && ev.error > 0.0)) {
    throw DomainError("quadratic_form: fitted covariance has a zero eigenvalue");
  }
  std::vector<double> resid(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) resid[k] = z[k] - fit.mu_hat[k];
  const ProjectionDecomposition dec = decompose(resid, design);
  return dec.s_mean / ev.mean + dec.s_row / ev.row + dec.s_col / ev.col + dec.s_error / ev.error;
}

}  // namespace qmatch
