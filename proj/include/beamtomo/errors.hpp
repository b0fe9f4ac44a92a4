#pragma once

#include <stdexcept>
#include <string>

namespace beamtomo {

// Base of every library error. The CLI maps the concrete subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments, malformed files, violated preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A grid does not cover the support of the mode being sampled on it.
class GridTooSmallError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// (mu, nu) = (0, 0) on some axis, or nu = 0 where a finite nu is required.
class DegenerateQueryError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Quadrature refinement did not settle within tolerance.
class NonConvergenceError : public Error {
 public:
  using Error::Error;
};

// A chirp or propagation step is not resolvable on the sampling grid.
class AliasingError : public NonConvergenceError {
 public:
  using NonConvergenceError::NonConvergenceError;
};

// A physical invariant (normalization, R >= 0, ...) failed a check.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace beamtomo
