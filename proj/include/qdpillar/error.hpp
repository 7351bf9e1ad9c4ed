#pragma once

#include <stdexcept>
#include <string>

namespace qdpillar {

enum class ErrorKind {
  InvalidParameter,
  StepSizeTooLarge,
  EmptyInput,
  InsufficientSpan,
  GridTooCoarse,
  NonFiniteResidual,
  DegenerateData,
  OverlappingPeaks,
  ZeroReference,
  OutOfRange,
  Precondition,
  Parse,
  Validation,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it to an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& message);

}  // namespace qdpillar
