#pragma once

#include <stdexcept>
#include <string>

namespace arrec {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  ZeroProduct,
  DegenerateEnsemble,
  NotPrimitive,
  SupportTooLarge,
  ZeroMatrix,
  NonPositive,
  Unsupported,
  PopulationOverflow,
  ZeroAnchor,
  NonpositiveDrift,
  CriticalRho,
  WrongRegime,
  AnchorDisagreement,
  BudgetExceeded,
  ConfigError,
  InvariantViolation,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure inside the core is reported as an Error carrying a code; the
// C API maps codes onto status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroProduct: return "ZeroProduct";
    case ErrorCode::DegenerateEnsemble: return "DegenerateEnsemble";
    case ErrorCode::NotPrimitive: return "NotPrimitive";
    case ErrorCode::SupportTooLarge: return "SupportTooLarge";
    case ErrorCode::ZeroMatrix: return "ZeroMatrix";
    case ErrorCode::NonPositive: return "NonPositive";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::PopulationOverflow: return "PopulationOverflow";
    case ErrorCode::ZeroAnchor: return "ZeroAnchor";
    case ErrorCode::NonpositiveDrift: return "NonpositiveDrift";
    case ErrorCode::CriticalRho: return "CriticalRho";
    case ErrorCode::WrongRegime: return "WrongRegime";
    case ErrorCode::AnchorDisagreement: return "AnchorDisagreement";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace arrec
