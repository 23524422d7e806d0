#pragma once

#include <stdexcept>
#include <string>

namespace symberg {

// Bad arguments: wrong shapes, non-finite entries, out-of-range indices.
struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Input lies outside the mathematical domain of an operation
// (logarithm of a matrix with spectrum on the negative axis, singular
// constant term of a jet, non-positive curvature, ...).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Cholesky of a matrix that is not positive definite.
struct FactorizationError : DomainError {
  FactorizationError(const std::string& what, int pivot)
      : DomainError(what), pivot(pivot) {}
  int pivot;
};

// A jet was built to a lower order than a consumer needs.
struct TruncationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Division by (x - y) requested for a jet that does not vanish on y = x.
struct NonDivisibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A self-consistency check failed; indicates a bug, not bad input.
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

// Malformed configuration or model file.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace symberg
