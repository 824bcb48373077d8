#include "qmatch/percentile.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qmatch/errors.hpp"

namespace qmatch {

PercentileVector percentiles(std::span<const double> y) {
  const std::size_t n = y.size();
  if (n == 0) throw DomainError("percentiles: empty response vector");
  for (double v : y) {
    if (!std::isfinite(v)) throw DomainError("percentiles: non-finite response value");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });

  PercentileVector out;
  out.p.resize(n);
  out.numerators.resize(n);
  const double denom = 2.0 * static_cast<double>(n);

  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start + 1;
    while (end < n && y[order[end]] == y[order[start]]) ++end;
    // 1-based first position a = start + 1, group size k = end - start.
    const auto a = static_cast<long long>(start) + 1;
    const auto k = static_cast<long long>(end - start);
    const long long numerator = 2 * a + k - 2;
    const double value = static_cast<double>(numerator) / denom;
    for (std::size_t j = start; j < end; ++j) {
      out.p[order[j]] = value;
      out.numerators[order[j]] = numerator;
    }
    start = end;
  }
  return out;
}

std::vector<double> quantile_match(const PercentileVector& pc, const TargetDistribution& dist) {
  std::vector<double> z(pc.size());
  std::transform(pc.p.begin(), pc.p.end(), z.begin(),
                 [&](double p) { return dist.quantile(p); });
  return z;
}

std::vector<double> quantile_match(std::span<const double> y, const TargetDistribution& dist) {
  return quantile_match(percentiles(y), dist);
}

}  // namespace qmatch
