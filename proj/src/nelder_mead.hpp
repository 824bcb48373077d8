#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>

namespace qmatch::detail {

template <std::size_t N>
struct SimplexResult {
  std::array<double, N> x{};
  double value = 0.0;
  bool converged = false;
  int evaluations = 0;
};

// Nelder-Mead downhill simplex, standard coefficients. Stops when the spread
// of function values falls below ftol * (1 + |f_best|).
template <std::size_t N>
SimplexResult<N> nelder_mead(const std::function<double(const std::array<double, N>&)>& f,
                             const std::array<double, N>& start, double step, double ftol,
                             int max_evaluations) {
  using Point = std::array<double, N>;
  std::array<Point, N + 1> simplex;
  std::array<double, N + 1> values;
  simplex[0] = start;
  for (std::size_t i = 0; i < N; ++i) {
    simplex[i + 1] = start;
    simplex[i + 1][i] += step;
  }
  int evals = 0;
  auto eval = [&](const Point& p) {
    ++evals;
    const double v = f(p);
    return std::isfinite(v) ? v : HUGE_VAL;
  };
  for (std::size_t i = 0; i <= N; ++i) values[i] = eval(simplex[i]);

  std::array<std::size_t, N + 1> order;
  bool converged = false;
  while (evals < max_evaluations) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    const std::size_t best = order[0];
    const std::size_t worst = order[N];
    const std::size_t second = order[N - 1];
    if (values[worst] - values[best] <= ftol * (1.0 + std::fabs(values[best]))) {
      converged = true;
      break;
    }

    Point centroid{};
    for (std::size_t i = 0; i <= N; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < N; ++j) centroid[j] += simplex[i][j] / N;
    }
    auto along = [&](double t) {
      Point p;
      for (std::size_t j = 0; j < N; ++j) p[j] = centroid[j] + t * (simplex[worst][j] - centroid[j]);
      return p;
    };

    const Point reflected = along(-1.0);
    const double fr = eval(reflected);
    if (fr < values[best]) {
      const Point expanded = along(-2.0);
      const double fe = eval(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = reflected;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    const Point contracted = along(outside ? -0.5 : 0.5);
    const double fc = eval(contracted);
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = contracted;
      values[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= N; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < N; ++j) {
        simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
      }
      values[i] = eval(simplex[i]);
    }
  }

  const auto best_it = std::min_element(values.begin(), values.end());
  SimplexResult<N> out;
  out.x = simplex[static_cast<std::size_t>(best_it - values.begin())];
  out.value = *best_it;
  out.converged = converged;
  out.evaluations = evals;
  return out;
}

}  // namespace qmatch::detail
