#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace deropt {

enum class ErrorCode {
  InvalidInput,
  MissingSchedule,
  DecliningBlockUnsupported,
  InfeasibleBoundsDetected,
  ReserveWithoutCapability,
  UnknownBuildingType,
  LengthMismatch,
  FractionOutOfRange,
  ProviderUnavailable,
  UnitMismatch,
  NumericalBreakdown,
  StatusMismatch,
  MissingSoc,
};

std::string_view to_string(ErrorCode code);

// All recoverable failures in the library surface as deropt::Error with a code
// that callers can switch on (the service maps them onto HTTP statuses).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace deropt
