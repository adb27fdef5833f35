#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace rwseg {

enum class ErrorCode {
  invalid_input,
  missing_seeds,
  conflicting_seeds,
  convexity_violation,
  solver_failure,
  not_positive_definite,
  oracle_too_large,
  singular_system,
  dimension_mismatch,
  unsupported_format,
  corrupt_file,
  unknown_code,
};

inline const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid-input";
    case ErrorCode::missing_seeds: return "missing-seeds";
    case ErrorCode::conflicting_seeds: return "conflicting-seeds";
    case ErrorCode::convexity_violation: return "convexity-violation";
    case ErrorCode::solver_failure: return "solver-failure";
    case ErrorCode::not_positive_definite: return "not-positive-definite";
    case ErrorCode::oracle_too_large: return "oracle-too-large";
    case ErrorCode::singular_system: return "singular-system";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::unsupported_format: return "unsupported-format";
    case ErrorCode::corrupt_file: return "corrupt-file";
    case ErrorCode::unknown_code: return "unknown-code";
  }
  return "unknown";
}

/// Base of every error raised by the library. `code()` identifies the failure
/// class so front-ends can map it to exit codes or HTTP statuses.
namespace detail {

inline std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

}  // namespace detail

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// λ fell outside [0, min edge weight].
class ConvexityViolation : public Error {
 public:
  ConvexityViolation(double lambda, double bound)
      : Error(ErrorCode::convexity_violation,
              "lambda " + detail::fmt(lambda) + " outside [0, min_weight] with min_weight = " +
                  detail::fmt(bound)),
        lambda_(lambda),
        bound_(bound) {}

  double lambda() const noexcept { return lambda_; }
  double bound() const noexcept { return bound_; }

 private:
  double lambda_;
  double bound_;
};

class SolverFailure : public Error {
 public:
  SolverFailure(double residual, long iterations)
      : Error(ErrorCode::solver_failure, "no convergence after " + std::to_string(iterations) +
                                             " iterations, relative residual " +
                                             detail::fmt(residual)),
        residual_(residual),
        iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  long iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  long iterations_;
};

}  // namespace rwseg
