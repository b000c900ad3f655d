#include "mocalc/error.hpp"

namespace mocalc {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NonSquare: return "NonSquare";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonDiagonalizable: return "NonDiagonalizable";
    case ErrorKind::PoleAtEigenvalue: return "PoleAtEigenvalue";
    case ErrorKind::NonPositiveBase: return "NonPositiveBase";
    case ErrorKind::NotCommuting: return "NotCommuting";
    case ErrorKind::EigenvalueOutOfDomain: return "EigenvalueOutOfDomain";
    case ErrorKind::ToleranceUnmet: return "ToleranceUnmet";
    case ErrorKind::FunctionEvalError: return "FunctionEvalError";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::StencilOutOfDomain: return "StencilOutOfDomain";
    case ErrorKind::SingularCoefficient: return "SingularCoefficient";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::MalformedInput: return "MalformedInput";
  }
  return "Unknown";
}

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::ToleranceUnmet:
    case ErrorKind::FunctionEvalError:
    case ErrorKind::DomainError:
      return 1;
    case ErrorKind::SyntaxError:
    case ErrorKind::MalformedInput:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::NonSquare:
      return 2;
    default:
      return 3;
  }
}

}  // namespace mocalc
