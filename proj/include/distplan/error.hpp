#pragma once

#include <stdexcept>
#include <string>

namespace distplan {

// Base of every error the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Factorization failed even after jitter escalation, or a value went NaN.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Bad configuration or scenario content. Maps to CLI exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// (goal, projection) pair with no finite divergence.
class UnsupportedProjection : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// CEM could not find enough finite-cost samples. Maps to CLI exit code 3.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace distplan
