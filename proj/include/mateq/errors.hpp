#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mateq {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Operand dimensions incompatible with the requested operation.
struct ShapeError : Error {
  using Error::Error;
};

/// A pivot fell below tolerance during LU factorization.
struct SingularMatrixError : Error {
  std::size_t pivot_index;
  SingularMatrixError(const std::string& msg, std::size_t pivot)
      : Error(msg), pivot_index(pivot) {}
};

/// The vectorized linear system for a Sylvester/Lyapunov equation is
/// singular to tolerance, so no unique solution exists.
struct NoUniqueSolutionError : Error {
  using Error::Error;
};

/// A matrix required to be positive-definite is not.
struct DefinitenessError : Error {
  using Error::Error;
};

/// An iterative solver exhausted its iteration budget.
struct ConvergenceError : Error {
  double last_residual;
  ConvergenceError(const std::string& msg, double residual)
      : Error(msg), last_residual(residual) {}
};

/// A finite-difference probe failed because the perturbed problem
/// could not be solved.
struct PerturbationError : Error {
  using Error::Error;
};

/// Malformed or inconsistent input (JSON schema violations etc.).
struct InputError : Error {
  using Error::Error;
};

}  // namespace mateq
