#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace coopreg {

enum class ErrorCode {
  kInvalidInput,
  kDimensionMismatch,
  kAssumptionViolated,
  kInfeasibleDesign,
  kNumerical,
  kUnsolvable,
  kWrongSpectrum,
  kUnsupportedEnvelope,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable code; what() is "<CODE>: <message>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace coopreg
