#include <doctest.h>

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numeric>

#include "qmatch/errors.hpp"
#include "qmatch/simdesign.hpp"

using namespace qmatch;

namespace {

double sample_variance(const std::vector<double>& v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double sample_kurtosis(const std::vector<double>& v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double m2 = 0, m4 = 0;
  for (double x : v) {
    const double d = (x - m) * (x - m);
    m2 += d;
    m4 += d * d;
  }
  m2 /= static_cast<double>(v.size());
  m4 /= static_cast<double>(v.size());
  return m4 / (m2 * m2);
}

}  // namespace

TEST_CASE("simulation is deterministic in the seed") {
  SimConfig cfg;
  cfg.nrows = 2;
  cfg.ncols = 2;
  cfg.seed = 1;
  CHECK(simulate(cfg).y == simulate(cfg).y);
  CHECK(simulate(cfg).y.size() == 4);
  SimConfig other = cfg;
  other.seed = 2;
  CHECK(simulate(cfg).y != simulate(other).y);

  SimConfig full_size;
  CHECK(simulate(full_size).y.size() == 1500);
  CHECK(simulate(full_size).y == simulate(full_size).y);
}

TEST_CASE("layout and additivity from a re-derived stream") {
  for (auto effects : {EffectDistribution::gaussian, EffectDistribution::cauchy}) {
    SimConfig cfg;
    cfg.nrows = 7;
    cfg.ncols = 4;
    cfg.effects = effects;
    cfg.seed = 77;
    cfg.noise_sd = 0.5;
    cfg.intercept = -2.0;
    const auto out = simulate(cfg);

    std::mt19937_64 gen(77);
    const boost::math::normal_distribution<double> normal;
    auto unit = [&] { return (static_cast<double>(gen() >> 12) + 0.5) / 4503599627370496.0; };
    auto draw = [&] {
      const double u = unit();
      return effects == EffectDistribution::gaussian ? boost::math::quantile(normal, u)
                                                     : std::tan(M_PI * (u - 0.5));
    };
    std::vector<double> rows(7), cols(4);
    for (double& v : rows) v = draw();
    for (double& v : cols) v = draw();
    for (std::size_t i = 0; i < 7; ++i) CHECK(out.row_effects[i] == doctest::Approx(rows[i]).epsilon(1e-12));
    for (std::size_t j = 0; j < 4; ++j) CHECK(out.col_effects[j] == doctest::Approx(cols[j]).epsilon(1e-12));

    for (std::size_t k = 0; k < 28; ++k) {
      CHECK(out.design.cell(k).row == k % 7);
      CHECK(out.design.cell(k).col == k / 7);
      CHECK(out.true_mu[k] == out.row_effects[k % 7] + out.col_effects[k / 7]);
      const double noise = 0.5 * boost::math::quantile(normal, unit());
      CHECK(out.y[k] - noise == doctest::Approx(-2.0 + out.true_mu[k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("open unit uniform stays strictly inside (0,1)") {
  std::mt19937_64 gen(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = open_unit_uniform(gen);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
  // Extreme engine outputs.
  CHECK((0.0 + 0.5) / 4503599627370496.0 > 0.0);
  CHECK((4503599627370495.0 + 0.5) / 4503599627370496.0 < 1.0);
}

TEST_CASE("gaussian-effects sample variance is near 3") {
  int inside = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    SimConfig cfg;
    cfg.seed = seed;
    const double v = sample_variance(simulate(cfg).y);
    if (v >= 2.3 && v <= 3.8) ++inside;
  }
  CHECK(inside >= 190);
}

TEST_CASE("cauchy effects give heavier tails than gaussian effects") {
  int heavier = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    SimConfig g;
    g.seed = seed;
    SimConfig c = g;
    c.effects = EffectDistribution::cauchy;
    if (sample_kurtosis(simulate(c).y) > sample_kurtosis(simulate(g).y)) ++heavier;
  }
  CHECK(heavier >= 95);
}

TEST_CASE("cauchy draw") {
  CHECK(cauchy_draw(0.5) == 0.0);
  CHECK(cauchy_draw(0.75) == 1.0);
  CHECK(cauchy_draw(0.25) == -1.0);
  const long double tan04 = std::tan(0.4L * 3.141592653589793238462643383279502884L);
  CHECK(cauchy_draw(0.9) == doctest::Approx(static_cast<double>(tan04)).epsilon(1e-14));
  CHECK(cauchy_draw(0.9) == doctest::Approx(3.0776835).epsilon(1e-7));
  CHECK_THROWS_AS(cauchy_draw(0.0), DomainError);
  CHECK_THROWS_AS(cauchy_draw(1.0), DomainError);
  CHECK_THROWS_AS(cauchy_draw(std::nan("")), DomainError);
}

TEST_CASE("invalid configurations") {
  SimConfig cfg;
  cfg.nrows = 1;
  CHECK_THROWS_AS(simulate(cfg), DomainError);
  cfg = SimConfig{};
  cfg.noise_sd = 0.0;
  CHECK_THROWS_AS(simulate(cfg), DomainError);
}
