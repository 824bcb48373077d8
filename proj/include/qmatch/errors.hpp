#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qmatch {

// Argument outside the mathematical domain of an operation (p outside (0,1),
// non-finite data, nonpositive Box-Cox input, malformed design).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The transformed response is exactly additive, so the residual variance is
// zero and the likelihood is unbounded.
class DegenerateFitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative routine ran out of its iteration budget. `best_iterate` holds
// the best parameter vector seen, in the routine's own parametrization.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, std::vector<double> best_iterate = {})
      : std::runtime_error(what), best_iterate_(std::move(best_iterate)) {}

  const std::vector<double>& best_iterate() const noexcept { return best_iterate_; }

 private:
  std::vector<double> best_iterate_;
};

}  // namespace qmatch
