#pragma once

#include <stdexcept>
#include <string>

namespace bubbelator {

/// Caller passed arguments that violate a precondition (sizes, flags).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of a function (z <= 0, phi = 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An iterative method failed to converge or produced non-finite values.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotFoundError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace bubbelator
