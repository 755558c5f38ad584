#pragma once

#include <stdexcept>
#include <string>

namespace chtx {

enum class ErrorCode {
  InvalidArgument,
  DomainError,
  NonFinite,
  NegativeDensity,
  InitialNegative,
  InitialZero,
  InitialFluxViolation,
  SolverDivergence,
  InvariantViolation,
  ConfigParse,
  ConfigValidation,
  Io,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::DomainError: return "domain_error";
    case ErrorCode::NonFinite: return "non_finite";
    case ErrorCode::NegativeDensity: return "negative_density";
    case ErrorCode::InitialNegative: return "initial_negative";
    case ErrorCode::InitialZero: return "initial_zero";
    case ErrorCode::InitialFluxViolation: return "initial_flux_violation";
    case ErrorCode::SolverDivergence: return "solver_divergence";
    case ErrorCode::InvariantViolation: return "invariant_violation";
    case ErrorCode::ConfigParse: return "config_parse";
    case ErrorCode::ConfigValidation: return "config_validation";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace chtx
