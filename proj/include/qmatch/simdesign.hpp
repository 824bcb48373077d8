#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "qmatch/linmodel.hpp"

namespace qmatch {

enum class EffectDistribution { gaussian, cauchy };

struct SimConfig {
  std::size_t nrows = 50;
  std::size_t ncols = 30;
  EffectDistribution effects = EffectDistribution::gaussian;
  double intercept = 5.0;
  double noise_sd = 1.0;
  std::uint64_t seed = 3142;
};

struct SimOutput {
  std::vector<double> y;
  DesignSpec design;
  std::vector<double> true_mu;  ///< row effect + column effect, without intercept or noise.
  std::vector<double> row_effects;
  std::vector<double> col_effects;
};

/// Uniform variate on the open interval (0,1) from the top 52 bits of one
/// engine output: (floor(x / 2^12) + 1/2) / 2^52.
double open_unit_uniform(std::mt19937_64& engine);

/// Standard Cauchy by inversion, tan(pi (u - 1/2)).
double cauchy_draw(double u);

/// Additive row-column simulation. One std::mt19937_64 stream seeded with
/// config.seed supplies, in order, nrows row effects, ncols column effects
/// and n noise terms, each by inversion of a single open_unit_uniform draw
/// (Gaussian through normal_quantile, Cauchy through cauchy_draw).
/// Observation k sits in row k % nrows and column k / nrows, and
/// y_k = intercept + row_effect + col_effect + noise_sd * z_k.
SimOutput simulate(const SimConfig& config);

}  // namespace qmatch
