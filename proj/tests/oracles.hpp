#pragma once

// Test-only reference computations, kept independent of the library paths
// they check.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "qmatch/linmodel.hpp"

namespace oracle {

inline std::vector<double> gaussian_vector(std::size_t n, std::uint64_t seed, double sd = 1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, sd);
  std::vector<double> v(n);
  for (double& x : v) x = dist(gen);
  return v;
}

// Row-column data with the requested spreads of row effects, column effects
// and noise, column-major layout.
inline std::vector<double> row_col_data(std::size_t r, std::size_t c, std::uint64_t seed,
                                        double row_sd, double col_sd, double noise_sd) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> re(r), ce(c);
  for (double& v : re) v = row_sd * z(gen);
  for (double& v : ce) v = col_sd * z(gen);
  std::vector<double> y(r * c);
  for (std::size_t k = 0; k < y.size(); ++k) y[k] = 3.0 + re[k % r] + ce[k / r] + noise_sd * z(gen);
  return y;
}

// Dense covariance sigma2 I + sigma2_row ROW + sigma2_col COL for a layout.
inline Eigen::MatrixXd dense_covariance(const qmatch::DesignSpec& design,
                                        const qmatch::VarianceComponents& vc) {
  const auto n = static_cast<Eigen::Index>(design.size());
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& a = design.cell(static_cast<std::size_t>(i));
      const auto& b = design.cell(static_cast<std::size_t>(j));
      if (a.row == b.row) sigma(i, j) += vc.sigma2_row;
      if (a.col == b.col) sigma(i, j) += vc.sigma2_col;
      if (i == j) sigma(i, j) += vc.sigma2;
    }
  }
  return sigma;
}

inline double dense_log_det(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

// Random-effects log likelihood with the GLS mean, from dense matrices.
inline double dense_random_loglik(const std::vector<double>& z, const qmatch::DesignSpec& design,
                                  const qmatch::VarianceComponents& vc) {
  const Eigen::MatrixXd sigma = dense_covariance(design, vc);
  const auto n = static_cast<Eigen::Index>(z.size());
  Eigen::Map<const Eigen::VectorXd> y(z.data(), n);
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd si_one = llt.solve(ones);
  const double mu = si_one.dot(y) / si_one.dot(ones);
  const Eigen::VectorXd r = y - mu * ones;
  const double qf = r.dot(llt.solve(r));
  return -0.5 * (static_cast<double>(n) * std::log(2.0 * M_PI) + dense_log_det(sigma) + qf);
}

// Compass search maximizing the dense likelihood over
// (log sigma2, sigma2_row >= 0, sigma2_col >= 0).
inline qmatch::VarianceComponents dense_random_mle(const std::vector<double>& z,
                                                   const qmatch::DesignSpec& design,
                                                   double* best_value) {
  double v = 0.0, m = 0.0;
  for (double x : z) m += x;
  m /= static_cast<double>(z.size());
  for (double x : z) v += (x - m) * (x - m);
  v /= static_cast<double>(z.size());

  double x[3] = {std::log(v / 2), v / 4, v / 4};
  auto eval = [&](const double* p) -> double {
    if (p[1] < 0 || p[2] < 0) return -std::numeric_limits<double>::infinity();
    return dense_random_loglik(z, design, {std::exp(p[0]), p[1], p[2]});
  };
  double fx = eval(x);
  double step[3] = {0.5, v / 4, v / 4};
  for (int sweep = 0; sweep < 20000; ++sweep) {
    bool improved = false;
    for (int k = 0; k < 3; ++k) {
      for (double dir : {1.0, -1.0}) {
        double y[3] = {x[0], x[1], x[2]};
        y[k] += dir * step[k];
        if (k > 0 && y[k] < 0) y[k] = 0;
        const double fy = eval(y);
        if (fy > fx) {
          std::copy(y, y + 3, x);
          fx = fy;
          improved = true;
        }
      }
    }
    if (!improved) {
      for (double& s : step) s *= 0.5;
      if (step[0] < 1e-12 && step[1] < 1e-14 * v && step[2] < 1e-14 * v) break;
    }
  }
  *best_value = fx;
  return {std::exp(x[0]), x[1], x[2]};
}

}  // namespace oracle
