#pragma once

#include <stdexcept>
#include <string>

namespace stablab {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad tree, bad family parameters, bad config.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A strategy of the wrong kind (shares vs fractions) was passed.
class ModeMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Wealth hit zero or below somewhere on the tree.
class AdmissibilityViolation : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Base for numerical failures inside a solve.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// The tree admits arbitrage: no equivalent martingale measure exists.
class NoMartingaleMeasure : public SolverError {
 public:
  using SolverError::SolverError;
};

class NonConvergence : public SolverError {
 public:
  NonConvergence(const std::string& what, double residual)
      : SolverError(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// The positive-wealth optimum sits on the boundary X <= 0.
class AdmissibilityBoundaryHit : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Root bracketing failed for the indifference price.
class BracketFailure : public SolverError {
 public:
  using SolverError::SolverError;
};

/// A diagnostic audit detected a violated property.
class AuditFailure : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace stablab
