#include "qdpillar/error.hpp"

namespace qdpillar {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::StepSizeTooLarge: return "step-size-too-large";
    case ErrorKind::EmptyInput: return "empty-input";
    case ErrorKind::InsufficientSpan: return "insufficient-span";
    case ErrorKind::GridTooCoarse: return "grid-too-coarse";
    case ErrorKind::NonFiniteResidual: return "non-finite-residual";
    case ErrorKind::DegenerateData: return "degenerate-data";
    case ErrorKind::OverlappingPeaks: return "overlapping-peaks";
    case ErrorKind::ZeroReference: return "zero-reference";
    case ErrorKind::OutOfRange: return "out-of-range";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Parse: return "parse-error";
    case ErrorKind::Validation: return "validation-error";
    case ErrorKind::Io: return "io-error";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void raise(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace qdpillar
