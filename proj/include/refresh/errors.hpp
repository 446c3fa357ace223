#pragma once

#include <stdexcept>
#include <string>

namespace refresh {

// Base of every error raised by the library. The CLI maps subclasses onto
// exit codes, so new error kinds should derive from one of the three groups
// below rather than from Error directly.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// The constraint set is empty. `min_power` is the smallest power any plan in
// the searched set can reach, when known (otherwise 0).
class InfeasibleError : public DomainError {
 public:
  InfeasibleError(const std::string& what, double min_power)
      : DomainError(what), min_power_(min_power) {}
  double min_power() const { return min_power_; }

 private:
  double min_power_;
};

// Brute-force enumeration guard exceeded.
class SizeError : public DomainError {
 public:
  using DomainError::DomainError;
};

class InsufficientDataError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Fitted model has beta <= 0, i.e. error rate not growing with interval.
class NonPhysicalFitError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Target MSE is below what the all-minimum-interval plan achieves.
class UnreachableFidelityError : public DomainError {
 public:
  UnreachableFidelityError(const std::string& what, double min_mse)
      : DomainError(what), min_mse_(min_mse) {}
  double min_mse() const { return min_mse_; }

 private:
  double min_mse_;
};

// Iteration cap hit or bracket search failed.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace refresh
