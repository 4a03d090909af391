#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace trisre {

enum class ErrorCode {
  InvalidSpec,
  MomentDiverges,
  LogMomentUndefined,
  TiltUnsupported,
  NotContractive,
  NoRoot,
  WeightDegenerate,
  RequiresEqualDiagonal,
  RequiresMuZero,
  NotT34Regime,
  RequiresExactTilt,
  NonPositiveOrderStat,
  DegenerateTail,
  InsufficientSupport,
  ArgumentOutOfRange,
  UnsupportedRegime,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// All library failures are reported through this type; `code()` is the
// machine-readable part, `what()` carries "<Code>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace trisre
