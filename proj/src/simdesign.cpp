#include "qmatch/simdesign.hpp"

#include <cmath>

#include "qmatch/errors.hpp"
#include "qmatch/special_functions.hpp"

namespace qmatch {

double open_unit_uniform(std::mt19937_64& engine) {
  // m + 1/2 needs 53 bits, so it is exact and the result never rounds to 1.
  constexpr double kTwoPowMinus52 = 1.0 / 4503599627370496.0;
  return (static_cast<double>(engine() >> 12) + 0.5) * kTwoPowMinus52;
}

double cauchy_draw(double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("cauchy_draw: u must lie in (0,1)");
  return special::tan_pi(u - 0.5);
}

SimOutput simulate(const SimConfig& config) {
  if (config.nrows < 2 || config.ncols < 2) throw DomainError("simulation needs nrows, ncols >= 2");
  if (!(config.noise_sd > 0.0)) throw DomainError("simulation needs noise_sd > 0");

  std::mt19937_64 engine(config.seed);
  auto effect = [&] {
    const double u = open_unit_uniform(engine);
    return config.effects == EffectDistribution::gaussian ? special::normal_quantile(u)
                                                          : cauchy_draw(u);
  };

  SimOutput out{.y = {},
                .design = DesignSpec(config.nrows, config.ncols),
                .true_mu = {},
                .row_effects = {},
                .col_effects = {}};
  out.row_effects.resize(config.nrows);
  out.col_effects.resize(config.ncols);
  for (double& v : out.row_effects) v = effect();
  for (double& v : out.col_effects) v = effect();

  const std::size_t n = config.nrows * config.ncols;
  out.true_mu.resize(n);
  out.y.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Cell& cell = out.design.cell(k);
    out.true_mu[k] = out.row_effects[cell.row] + out.col_effects[cell.col];
    const double noise = config.noise_sd * special::normal_quantile(open_unit_uniform(engine));
    out.y[k] = config.intercept + out.true_mu[k] + noise;
  }
  return out;
}

}  // namespace qmatch
