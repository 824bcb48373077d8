#include "qmatch/translik.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "qmatch/errors.hpp"
#include "qmatch/special_functions.hpp"

namespace qmatch {

namespace {

using PointEvaluator = std::function<ProfilePoint(double)>;

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

ProfilePoint guarded(const PointEvaluator& eval, double param) {
  try {
    return eval(param);
  } catch (const DegenerateFitError& e) {
    ProfilePoint p;
    p.param = param;
    p.error = e.what();
    return p;
  } catch (const NumericError& e) {
    ProfilePoint p;
    p.param = param;
    p.error = e.what();
    return p;
  }
}

ProfilePoint point_from(double param, const ReducedProfileLoglik& r) {
  ProfilePoint p;
  p.param = param;
  p.ok = true;
  p.det_term = r.det_term;
  p.jacobian_term = r.jacobian_term;
  p.value = r.value;
  return p;
}

// Golden-section maximization on [lo, hi].
ProfilePoint golden_section(const PointEvaluator& eval, double lo, double hi, double tol) {
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  auto value_of = [](const ProfilePoint& p) {
    return p.ok ? p.value : -std::numeric_limits<double>::infinity();
  };
  double c = hi - ratio * (hi - lo);
  double d = lo + ratio * (hi - lo);
  ProfilePoint pc = guarded(eval, c);
  ProfilePoint pd = guarded(eval, d);
  while (hi - lo > tol) {
    if (value_of(pc) > value_of(pd)) {
      hi = d;
      d = c;
      pd = pc;
      c = hi - ratio * (hi - lo);
      pc = guarded(eval, c);
    } else {
      lo = c;
      c = d;
      pc = pd;
      d = lo + ratio * (hi - lo);
      pd = guarded(eval, d);
    }
  }
  ProfilePoint mid = guarded(eval, 0.5 * (lo + hi));
  ProfilePoint best = value_of(pc) > value_of(pd) ? pc : pd;
  return value_of(mid) >= value_of(best) ? mid : best;
}

ProfileCurve run_profile(ProfileFamily family, ModelKind model, std::span<const double> grid_in,
                         const ProfileOptions& options, const PointEvaluator& eval) {
  if (grid_in.empty()) throw DomainError("profile grid is empty");
  std::vector<double> grid(grid_in.begin(), grid_in.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  ProfileCurve curve;
  curve.family = family;
  curve.model = model;
  curve.points.resize(grid.size());
  parallel_for(grid.size(), options.threads,
               [&](std::size_t i) { curve.points[i] = guarded(eval, grid[i]); });

  const std::size_t failed = curve.failures();
  if (5 * failed > grid.size()) {
    std::ostringstream msg;
    msg << failed << " of " << grid.size() << " grid points failed (more than 20%)";
    for (const auto& p : curve.points) {
      if (!p.ok) {
        msg << "; first failure at " << p.param << ": " << p.error;
        break;
      }
    }
    throw NumericError(msg.str());
  }

  std::size_t best = grid.size();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (curve.points[i].ok && (best == grid.size() || curve.points[i].value > curve.points[best].value)) {
      best = i;
    }
  }
  curve.argmax_param = curve.points[best].param;
  curve.argmax_value = curve.points[best].value;

  if (options.refine && grid.size() > 1) {
    const double lo = grid[best == 0 ? 0 : best - 1];
    const double hi = grid[std::min(best + 1, grid.size() - 1)];
    const ProfilePoint refined = golden_section(eval, lo, hi, options.refine_tolerance);
    if (refined.ok && refined.value > curve.argmax_value) {
      curve.argmax_param = refined.param;
      curve.argmax_value = refined.value;
    }
    curve.refined = true;
  }
  return curve;
}

}  // namespace

std::size_t ProfileCurve::failures() const {
  return static_cast<std::size_t>(
      std::count_if(points.begin(), points.end(), [](const ProfilePoint& p) { return !p.ok; }));
}

std::string to_string(ProfileFamily family) {
  switch (family) {
    case ProfileFamily::student_t:
      return "t";
    case ProfileFamily::alpha_beta_diagonal:
      return "alpha";
    case ProfileFamily::boxcox:
      return "boxcox";
  }
  return "";
}

ReducedProfileLoglik reduced_profile_loglik(const PercentileVector& pc, const TargetDistribution& dist,
                                            const DesignSpec& design) {
  std::vector<double> z(pc.size());
  double jacobian = 0.0;
  for (std::size_t i = 0; i < pc.size(); ++i) {
    const QuantilePoint q = dist.evaluate(pc.p[i]);
    z[i] = q.value;
    jacobian += q.log_derivative;
  }
  ReducedProfileLoglik out;
  out.target = dist.label();
  out.model = design.model();
  out.fit = fit_model(z, design);
  out.det_term = -0.5 * out.fit.log_det_sigma_hat;
  out.jacobian_term = jacobian;
  out.value = out.det_term + out.jacobian_term;
  return out;
}

ReducedProfileLoglik reduced_profile_loglik(std::span<const double> y, const TargetDistribution& dist,
                                            const DesignSpec& design) {
  return reduced_profile_loglik(percentiles(y), dist, design);
}

double loglik_ratio(std::span<const double> y, const TargetDistribution& a,
                    const TargetDistribution& b, const DesignSpec& design) {
  const PercentileVector pc = percentiles(y);
  return reduced_profile_loglik(pc, a, design).value - reduced_profile_loglik(pc, b, design).value;
}

GaussianUniformDiagnostics lr_diagnostics_gaussian_uniform(std::span<const double> y,
                                                           const DesignSpec& design) {
  const PercentileVector pc = percentiles(y);
  const auto gauss = reduced_profile_loglik(pc, TargetDistribution::gaussian(), design);
  const auto unif = reduced_profile_loglik(pc, TargetDistribution::uniform(), design);
  const double n = static_cast<double>(pc.size());
  GaussianUniformDiagnostics d;
  d.n = pc.size();
  d.det_term = gauss.det_term - unif.det_term;
  d.correction_term = gauss.jacobian_term - unif.jacobian_term;
  d.lr = gauss.value - unif.value;
  d.det_prediction = -0.5 * n * std::log(12.0);
  d.correction_prediction = 0.5 * n * (1.0 + special::kLogTwoPi);
  return d;
}

LogisticUniformDiagnostics lr_diagnostics_logistic_uniform(std::span<const double> y,
                                                           const DesignSpec& design) {
  const PercentileVector pc = percentiles(y);
  const auto logis = reduced_profile_loglik(pc, TargetDistribution::logistic(), design);
  const auto unif = reduced_profile_loglik(pc, TargetDistribution::uniform(), design);
  LogisticUniformDiagnostics d;
  d.n = pc.size();
  d.det_term = logis.det_term - unif.det_term;
  d.jacobian_term = logis.jacobian_term - unif.jacobian_term;
  d.lr = logis.value - unif.value;
  d.approximation = d.det_term + 2.0 * static_cast<double>(pc.size());
  return d;
}

std::vector<double> linear_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw DomainError("grid needs step > 0 and hi >= lo");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) grid[i] = lo + static_cast<double>(i) * step;
  // Round away accumulated error at the 12th decimal, so 0 (the Gaussian and
  // logistic members) and decimal steps land exactly on the grid.
  for (double& g : grid) g = std::round(g * 1e12) / 1e12 + 0.0;
  if (std::fabs(grid.back() - hi) < 1e-9) grid.back() = hi;
  return grid;
}

std::vector<double> default_inv_nu_grid() { return linear_grid(0.0, 1.0, 0.02); }
std::vector<double> default_alpha_grid() { return linear_grid(-1.0, 1.0, 0.01); }
std::vector<double> default_boxcox_grid() { return linear_grid(-1.0, 1.0, 0.05); }

ProfileCurve profile_student_t(std::span<const double> y, const DesignSpec& design,
                               std::span<const double> grid, const ProfileOptions& options) {
  for (double v : grid) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("t-family grid values must lie in [0,1]");
  }
  const PercentileVector pc = percentiles(y);
  const PointEvaluator eval = [&](double inv_nu) {
    return point_from(inv_nu,
                      reduced_profile_loglik(pc, TargetDistribution::student_t_inv_nu(inv_nu), design));
  };
  return run_profile(ProfileFamily::student_t, design.model(), grid, options, eval);
}

ProfileCurve profile_alpha(std::span<const double> y, const DesignSpec& design,
                           std::span<const double> grid, const ProfileOptions& options) {
  for (double v : grid) {
    if (!(v >= -1.0 && v <= 1.0)) throw DomainError("alpha grid values must lie in [-1,1]");
  }
  const PercentileVector pc = percentiles(y);
  const PointEvaluator eval = [&](double alpha) {
    return point_from(alpha,
                      reduced_profile_loglik(pc, TargetDistribution::alpha_beta(alpha, alpha), design));
  };
  return run_profile(ProfileFamily::alpha_beta_diagonal, design.model(), grid, options, eval);
}

ProfileCurve boxcox_profile(std::span<const double> y, const DesignSpec& design,
                            std::span<const double> grid, const ProfileOptions& options) {
  std::vector<double> log_y(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0) || !std::isfinite(y[i])) {
      throw DomainError("Box-Cox transformation needs strictly positive finite data");
    }
    log_y[i] = std::log(y[i]);
  }
  const double sum_log_y = std::accumulate(log_y.begin(), log_y.end(), 0.0);
  const PointEvaluator eval = [&](double g) {
    std::vector<double> z(log_y.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
      z[i] = g == 0.0 ? log_y[i] : std::expm1(g * log_y[i]) / g;
    }
    const ModelFit fit = fit_model(z, design);
    ProfilePoint p;
    p.param = g;
    p.ok = true;
    p.det_term = -0.5 * fit.log_det_sigma_hat;
    p.jacobian_term = (g - 1.0) * sum_log_y;
    p.value = p.det_term + p.jacobian_term;
    return p;
  };
  return run_profile(ProfileFamily::boxcox, design.model(), grid, options, eval);
}

std::optional<double> exact_entropy(const TargetDistribution& dist) {
  const double log_scale = std::log(std::fabs(dist.scale()));
  switch (dist.kind()) {
    case TargetKind::gaussian:
      return 0.5 * (1.0 + special::kLogTwoPi) + log_scale;
    case TargetKind::uniform:
      return log_scale;
    case TargetKind::logistic:
      return 2.0 + log_scale;
    case TargetKind::student_t: {
      if (dist.inv_nu() == 0.0) return 0.5 * (1.0 + special::kLogTwoPi) + log_scale;
      const double nu = 1.0 / dist.inv_nu();
      return 0.5 * (nu + 1.0) * (special::digamma(0.5 * (nu + 1.0)) - special::digamma(0.5 * nu)) +
             0.5 * std::log(nu) + special::log_beta(0.5 * nu, 0.5) + log_scale;
    }
    case TargetKind::alpha_beta:
      if (dist.alpha() == 0.0 && dist.beta() == 0.0) return 2.0 + log_scale;
      // Q'(p) = 2 when alpha = beta = 1.
      if (dist.alpha() == 1.0 && dist.beta() == 1.0) return std::log(2.0) + log_scale;
      return std::nullopt;
  }
  return std::nullopt;
}

EntropyQuadrature entropy_quadrature(const TargetDistribution& dist, std::size_t n) {
  if (n < 10) throw DomainError("entropy_quadrature needs n >= 10");
  EntropyQuadrature out;
  out.n = n;
  const double denom = 2.0 * static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    sum += dist.log_quantile_derivative(static_cast<double>(2 * i - 1) / denom);
  }
  out.quadrature = sum / static_cast<double>(n);
  out.exact = exact_entropy(dist);
  if (out.exact) out.gap = out.quadrature - *out.exact;
  return out;
}

double pearson_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("correlation: length mismatch");
  const std::size_t n = a.size();
  if (n < 3) throw DomainError("correlation needs at least 3 observations");
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(n);
  double saa = 0.0;
  double sbb = 0.0;
  double sab = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) throw DomainError("correlation: zero-variance column");
  return sab / std::sqrt(saa * sbb);
}

std::vector<double> correlation_report(std::span<const double> y,
                                       std::span<const TargetDistribution> dists) {
  const PercentileVector pc = percentiles(y);
  std::vector<double> out;
  out.reserve(dists.size());
  for (const auto& d : dists) out.push_back(pearson_correlation(y, quantile_match(pc, d)));
  return out;
}

}  // namespace qmatch
