#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace saddle {

// Precondition or shape mismatch at an API boundary.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A value or gradient evaluated to inf/nan during iteration.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, std::size_t iterate_index)
      : std::runtime_error(what + " (iterate " + std::to_string(iterate_index) + ")"),
        iterate_index_(iterate_index) {}

  std::size_t iterate_index() const noexcept { return iterate_index_; }

 private:
  std::size_t iterate_index_;
};

// An inner solver ran out of its iteration budget.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double best_residual)
      : std::runtime_error(what + " (best residual " + std::to_string(best_residual) + ")"),
        best_residual_(best_residual) {}

  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

// Too few usable iterates for a rate fit.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// More than one critical-point record matched a trajectory limit.
class AmbiguousBasin : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A check whose hypotheses are not met by the given data.
class Inapplicable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace saddle
