#pragma once

#include <stdexcept>
#include <string>

namespace sqcir {

enum class ErrorCode {
  InvalidInput,
  InvalidParameter,
  ParseError,
  SchemaError,
  InvariantViolation,
  StepSize,
  Divergence,
  Convergence,
  DegenerateParameter,
  UndefinedMetric,
  FitFailure,
  Io,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so the
/// C boundary can translate it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sqcir
