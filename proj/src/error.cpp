#include "trisre/error.hpp"

namespace trisre {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::MomentDiverges: return "MomentDiverges";
    case ErrorCode::LogMomentUndefined: return "LogMomentUndefined";
    case ErrorCode::TiltUnsupported: return "TiltUnsupported";
    case ErrorCode::NotContractive: return "NotContractive";
    case ErrorCode::NoRoot: return "NoRoot";
    case ErrorCode::WeightDegenerate: return "WeightDegenerate";
    case ErrorCode::RequiresEqualDiagonal: return "RequiresEqualDiagonal";
    case ErrorCode::RequiresMuZero: return "RequiresMuZero";
    case ErrorCode::NotT34Regime: return "NotT34Regime";
    case ErrorCode::RequiresExactTilt: return "RequiresExactTilt";
    case ErrorCode::NonPositiveOrderStat: return "NonPositiveOrderStat";
    case ErrorCode::DegenerateTail: return "DegenerateTail";
    case ErrorCode::InsufficientSupport: return "InsufficientSupport";
    case ErrorCode::ArgumentOutOfRange: return "ArgumentOutOfRange";
    case ErrorCode::UnsupportedRegime: return "UnsupportedRegime";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace trisre
