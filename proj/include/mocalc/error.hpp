#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mocalc {

enum class ErrorKind {
  NonSquare,
  DimensionMismatch,
  NonDiagonalizable,
  PoleAtEigenvalue,
  NonPositiveBase,
  NotCommuting,
  EigenvalueOutOfDomain,
  ToleranceUnmet,
  FunctionEvalError,
  DomainError,
  SyntaxError,
  StencilOutOfDomain,
  SingularCoefficient,
  PreconditionViolated,
  MalformedInput,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure in the library is reported as an Error carrying its kind.
/// The CLI maps kinds onto exit codes (see exit_code_for).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// 1 numerical failure, 2 input error, 3 precondition violation.
int exit_code_for(ErrorKind kind) noexcept;

}  // namespace mocalc
