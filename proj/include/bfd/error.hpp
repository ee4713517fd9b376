#pragma once

#include <stdexcept>
#include <string>

namespace bfd {

enum class ErrorCode {
  InvalidParameter,
  NonintegrableAngular,
  SingularGram,
  VacuumState,
  SaturationRegime,
  NoConvergence,
  InsufficientSupport,
  UnsupportedNorm,
  GridMismatch,
  ParseError,
  ValidationError,
  Io,
};

const char* to_string(ErrorCode code);

/// Library-wide exception. Carries a machine-checkable code next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParameter: return "invalid-parameter";
    case ErrorCode::NonintegrableAngular: return "nonintegrable-angular";
    case ErrorCode::SingularGram: return "singular-gram";
    case ErrorCode::VacuumState: return "vacuum-state";
    case ErrorCode::SaturationRegime: return "saturation-regime";
    case ErrorCode::NoConvergence: return "no-convergence";
    case ErrorCode::InsufficientSupport: return "insufficient-support";
    case ErrorCode::UnsupportedNorm: return "unsupported-p";
    case ErrorCode::GridMismatch: return "grid-mismatch";
    case ErrorCode::ParseError: return "parse-error";
    case ErrorCode::ValidationError: return "validation-error";
    case ErrorCode::Io: return "io-error";
  }
  return "unknown";
}

}  // namespace bfd
