#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qmatch/target_distribution.hpp"

namespace qmatch {

/// Empirical percentiles pc(y_i) at the observed points, aligned with the
/// input. pc is the midpoint of the left and right limits of the empirical
/// distribution function, so untied values get (2i-1)/(2n) and a tie group
/// at sorted positions a..a+k-1 (1-based) shares (2a+k-2)/(2n).
///
/// Every value is a multiple of 1/(2n); `numerators` holds the integers
/// 2n * pc(y_i) so that exact identities can be checked without rounding.
struct PercentileVector {
  std::vector<double> p;
  std::vector<long long> numerators;

  std::size_t size() const noexcept { return p.size(); }
};

/// Throws DomainError on empty input or non-finite values.
PercentileVector percentiles(std::span<const double> y);

/// Q(pc(y_i)) component-wise.
std::vector<double> quantile_match(std::span<const double> y, const TargetDistribution& dist);
std::vector<double> quantile_match(const PercentileVector& pc, const TargetDistribution& dist);

}  // namespace qmatch
