#pragma once

#include <stdexcept>
#include <string>

namespace mvfuse {

enum class ErrorCode {
  InvalidInput,
  InvalidSpec,
  InvalidShape,
  InvalidK,
  InvalidTau,
  InvalidDelta,
  AsymmetricInput,
  DegenerateDiagonal,
  DegenerateResidual,
  DegenerateDelta,
  RankDeficientU,
  NonMonotoneObjective,
  NumericalFailure,
  MissingTrace,
  InconsistentViews,
  TruncatedFile,
  ConfigError,
  IoError,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidShape: return "InvalidShape";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::InvalidTau: return "InvalidTau";
    case ErrorCode::InvalidDelta: return "InvalidDelta";
    case ErrorCode::AsymmetricInput: return "AsymmetricInput";
    case ErrorCode::DegenerateDiagonal: return "DegenerateDiagonal";
    case ErrorCode::DegenerateResidual: return "DegenerateResidual";
    case ErrorCode::DegenerateDelta: return "DegenerateDelta";
    case ErrorCode::RankDeficientU: return "RankDeficientU";
    case ErrorCode::NonMonotoneObjective: return "NonMonotoneObjective";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::MissingTrace: return "MissingTrace";
    case ErrorCode::InconsistentViews: return "InconsistentViews";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mvfuse
