#include "coopreg/error.hpp"

namespace coopreg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput:
      return "INVALID_INPUT";
    case ErrorCode::kDimensionMismatch:
      return "DIMENSION_MISMATCH";
    case ErrorCode::kAssumptionViolated:
      return "ASSUMPTION_VIOLATED";
    case ErrorCode::kInfeasibleDesign:
      return "INFEASIBLE_DESIGN";
    case ErrorCode::kNumerical:
      return "NUMERICAL_ERROR";
    case ErrorCode::kUnsolvable:
      return "UNSOLVABLE";
    case ErrorCode::kWrongSpectrum:
      return "WRONG_SPECTRUM";
    case ErrorCode::kUnsupportedEnvelope:
      return "UNSUPPORTED_ENVELOPE";
    case ErrorCode::kIo:
      return "IO_ERROR";
  }
  return "UNKNOWN";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

}  // namespace coopreg
