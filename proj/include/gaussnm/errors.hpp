#pragma once

#include <stdexcept>
#include <string>

namespace gaussnm {

// Invalid input: negative thermal occupation, unphysical covariance, bad config value.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Internal invariant violated during evaluation (singular matrix, NaN).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Adaptive quadrature did not meet its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double error_estimate)
      : std::runtime_error(what), error_estimate_(error_estimate) {}
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double error_estimate_;
};

// Time requested outside a tabulated grid.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// A closed-form evaluation was asked for a rate/coefficient shape it does not cover.
class UnsupportedShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Output could not be written or input could not be read.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gaussnm
