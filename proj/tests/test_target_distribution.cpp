#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "qmatch/errors.hpp"
#include "qmatch/target_distribution.hpp"

using qmatch::TargetDistribution;

namespace {

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> out;
  for (double p = lo; p <= hi + 1e-12; p += step) out.push_back(p);
  return out;
}

std::vector<TargetDistribution> all_kinds() {
  return {TargetDistribution::gaussian(),        TargetDistribution::uniform(),
          TargetDistribution::logistic(),        TargetDistribution::student_t_inv_nu(0.0),
          TargetDistribution::student_t_inv_nu(0.15), TargetDistribution::student_t_inv_nu(1.0),
          TargetDistribution::alpha_beta(0.0, 0.0), TargetDistribution::alpha_beta(0.3, 0.3),
          TargetDistribution::alpha_beta(-0.7, 0.4), TargetDistribution::alpha_beta(1.0, 1.0),
          TargetDistribution::alpha_beta(-1.0, -1.0)};
}

}  // namespace

TEST_CASE("quantile examples") {
  CHECK(TargetDistribution::gaussian().quantile(0.5) == 0.0);
  CHECK(TargetDistribution::student_t_inv_nu(1.0).quantile(0.75) == 1.0);
  CHECK(TargetDistribution::alpha_beta(1.0, 1.0).quantile(0.25) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(std::fabs(TargetDistribution::gaussian().quantile(0.975) - 1.9599640) < 1e-7);
  // inv_nu = 0 is the Gaussian on the same code path.
  for (double p : {0.01, 0.3, 0.8}) {
    CHECK(TargetDistribution::student_t_inv_nu(0.0).quantile(p) == TargetDistribution::gaussian().quantile(p));
  }
  // alpha = beta = 0 is the logistic.
  CHECK(TargetDistribution::alpha_beta(0.0, 0.0).quantile(0.3) == TargetDistribution::logistic().quantile(0.3));
}

TEST_CASE("log quantile derivative examples") {
  for (double p : {0.001, 0.4, 0.9}) CHECK(TargetDistribution::uniform().log_quantile_derivative(p) == 0.0);
  CHECK(TargetDistribution::logistic().log_quantile_derivative(0.5) == doctest::Approx(std::log(4.0)).epsilon(1e-14));
  CHECK(TargetDistribution::gaussian().log_quantile_derivative(0.5) == doctest::Approx(0.5 * std::log(2.0 * M_PI)).epsilon(1e-14));

  // alpha = beta = 0.3 at p = 0.2 against a central difference of the quantile.
  const auto ab = TargetDistribution::alpha_beta(0.3, 0.3);
  const double h = 1e-6;
  const double fd = (ab.quantile(0.2 + h) - ab.quantile(0.2 - h)) / (2 * h);
  CHECK(ab.log_quantile_derivative(0.2) == doctest::Approx(std::log(fd)).epsilon(1e-8));
  CHECK(ab.log_quantile_derivative(0.2) ==
        doctest::Approx(std::log(std::pow(0.2, -0.7) + std::pow(0.8, -0.7))).epsilon(1e-14));
}

TEST_CASE("student_t_log_density") {
  CHECK(qmatch::student_t_log_density(1.0, 0.0) == doctest::Approx(-1.1447299).epsilon(1e-7));
  CHECK(qmatch::student_t_log_density(1.0, 1.0) == doctest::Approx(-1.8378771).epsilon(1e-7));
  // nu = 5 closed form: f(x) = 8 / (3 pi sqrt 5) (1 + x^2/5)^-3.
  const long double pi = 3.14159265358979323846264338L;
  const long double ref = std::log(8.0L / (3.0L * pi * std::sqrt(5.0L))) - 3.0L * std::log1p(1.5L * 1.5L / 5.0L);
  CHECK(std::fabs(qmatch::student_t_log_density(0.2, 1.5) - static_cast<double>(ref)) < 1e-8);
  // Approaches the Gaussian log density.
  CHECK(std::fabs(qmatch::student_t_log_density(1e-6, 1.0) - (-0.5 - 0.5 * std::log(2 * M_PI))) < 1e-5);
  CHECK_THROWS_AS(qmatch::student_t_log_density(0.0, 1.0), qmatch::DomainError);
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(TargetDistribution::gaussian().quantile(0.0), qmatch::DomainError);
  CHECK_THROWS_AS(TargetDistribution::logistic().quantile(1.0), qmatch::DomainError);
  CHECK_THROWS_AS(TargetDistribution::uniform().log_quantile_derivative(-0.1), qmatch::DomainError);
  CHECK_THROWS_AS(TargetDistribution::student_t_inv_nu(1.5), qmatch::DomainError);
  CHECK_THROWS_AS(TargetDistribution::student_t_inv_nu(-0.1), qmatch::DomainError);
  CHECK_THROWS_AS(TargetDistribution::alpha_beta(1.2, 0.0), qmatch::DomainError);
  CHECK_THROWS_AS(TargetDistribution::gaussian().affine(1.0, 0.0), qmatch::DomainError);
  CHECK_THROWS_AS(TargetDistribution::alpha_beta(0.2, 0.2).cdf(0.0), qmatch::DomainError);
}

TEST_CASE("quantile is strictly increasing for every kind") {
  const auto ps = grid(0.001, 0.999, 0.001);
  for (const auto& d : all_kinds()) {
    CAPTURE(d.label());
    for (std::size_t i = 1; i < ps.size(); ++i) CHECK(d.quantile(ps[i]) > d.quantile(ps[i - 1]));
  }
}

TEST_CASE("log quantile derivative finite at the extreme reachable percentile") {
  const double p_min = 1.0 / 2e6;
  for (const auto& d : all_kinds()) {
    CAPTURE(d.label());
    CHECK(std::isfinite(d.log_quantile_derivative(p_min)));
    CHECK(std::isfinite(d.log_quantile_derivative(1.0 - p_min)));
  }
}

TEST_CASE("log quantile derivative matches finite differences on random parameters") {
  std::mt19937_64 gen(20261018);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  std::vector<TargetDistribution> dists = {TargetDistribution::gaussian(), TargetDistribution::uniform(),
                                           TargetDistribution::logistic()};
  for (int i = 0; i < 20; ++i) {
    dists.push_back(TargetDistribution::student_t_inv_nu(unit(gen)));
    dists.push_back(TargetDistribution::alpha_beta(sym(gen), sym(gen)));
  }
  for (const auto& d : dists) {
    CAPTURE(d.label());
    for (double p = 0.01; p <= 0.99 + 1e-12; p += 0.0245) {
      const double h = 1e-5 * std::min(p, 1 - p);
      const double fd = (d.quantile(p + h) - d.quantile(p - h)) / (2 * h);
      const double got = std::exp(d.log_quantile_derivative(p));
      CHECK(std::fabs(got - fd) <= 1e-5 * fd);
    }
  }
}

TEST_CASE("family continuity at the Gaussian and logistic limits") {
  const auto t = TargetDistribution::student_t_inv_nu(1e-6);
  const auto ab = TargetDistribution::alpha_beta(1e-6, 1e-6);
  for (double p = 0.01; p <= 0.99 + 1e-12; p += 0.01) {
    CHECK(std::fabs(t.quantile(p) - TargetDistribution::gaussian().quantile(p)) < 1e-3);
    CHECK(std::fabs(ab.quantile(p) - TargetDistribution::logistic().quantile(p)) < 1e-3);
  }
}

TEST_CASE("cdf inverts quantile") {
  std::vector<TargetDistribution> dists = {TargetDistribution::gaussian(), TargetDistribution::uniform(),
                                           TargetDistribution::logistic()};
  for (double nu : {1.0, 2.0, 5.0, 6.67, 50.0}) dists.push_back(TargetDistribution::student_t_inv_nu(1.0 / nu));
  for (const auto& d : dists) {
    CAPTURE(d.label());
    for (double p = 0.01; p <= 0.99 + 1e-12; p += 0.01) CHECK(std::fabs(d.cdf(d.quantile(p)) - p) < 1e-10);
  }
}

TEST_CASE("affine targets shift quantiles and log derivatives") {
  const auto g = TargetDistribution::gaussian();
  const auto a = g.affine(3.0, -2.0);
  CHECK(a.quantile(0.3) == doctest::Approx(3.0 - 2.0 * g.quantile(0.3)));
  CHECK(a.log_quantile_derivative(0.3) == doctest::Approx(g.log_quantile_derivative(0.3) + std::log(2.0)));
  CHECK(a.cdf(a.quantile(0.3)) == doctest::Approx(0.7));
  const auto q = a.evaluate(0.3);
  CHECK(q.value == a.quantile(0.3));
  CHECK(q.log_derivative == a.log_quantile_derivative(0.3));
}
