#include "rnash/error.hpp"

namespace rnash {

const char* error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonSymmetricCost: return "NonSymmetricCost";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyStencil: return "EmptyStencil";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NonPositiveAlpha: return "NonPositiveAlpha";
    case ErrorCode::NonPositiveEntry: return "NonPositiveEntry";
    case ErrorCode::WindowMismatch: return "WindowMismatch";
    case ErrorCode::TailBoundFailure: return "TailBoundFailure";
    case ErrorCode::BlowUpDetected: return "BlowUpDetected";
    case ErrorCode::TruncationTooSmall: return "TruncationTooSmall";
    case ErrorCode::BallEscape: return "BallEscape";
    case ErrorCode::NoContraction: return "NoContraction";
    case ErrorCode::DominationViolated: return "DominationViolated";
    case ErrorCode::GatheringFailed: return "GatheringFailed";
    case ErrorCode::CompatibilityFailed: return "CompatibilityFailed";
    case ErrorCode::NumericalSingularity: return "NumericalSingularity";
    case ErrorCode::ImaginaryResidue: return "ImaginaryResidue";
    case ErrorCode::AliasingDetected: return "AliasingDetected";
    case ErrorCode::UncertifiedSymbol: return "UncertifiedSymbol";
    case ErrorCode::InvalidPlan: return "InvalidPlan";
    case ErrorCode::ExplodingState: return "ExplodingState";
    case ErrorCode::BadStep: return "BadStep";
    case ErrorCode::UncertifiedFlow: return "UncertifiedFlow";
    case ErrorCode::InadmissibleDeviation: return "InadmissibleDeviation";
    case ErrorCode::NotPositiveSemidefinite: return "NotPositiveSemidefinite";
    case ErrorCode::TargetInfeasible: return "TargetInfeasible";
    case ErrorCode::MonotonicityBarrierCrossed: return "MonotonicityBarrierCrossed";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

ErrorClass error_class(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::GatheringFailed:
    case ErrorCode::CompatibilityFailed:
    case ErrorCode::MonotonicityBarrierCrossed:
    case ErrorCode::TailBoundFailure:
    case ErrorCode::DominationViolated:
    case ErrorCode::UncertifiedSymbol:
    case ErrorCode::UncertifiedFlow:
    case ErrorCode::InadmissibleDeviation:
    case ErrorCode::NotPositiveSemidefinite:
      return ErrorClass::Certification;
    case ErrorCode::BlowUpDetected:
    case ErrorCode::BallEscape:
    case ErrorCode::NoContraction:
    case ErrorCode::NumericalSingularity:
    case ErrorCode::ImaginaryResidue:
    case ErrorCode::AliasingDetected:
    case ErrorCode::ExplodingState:
      return ErrorClass::Numerical;
    default:
      return ErrorClass::Config;
  }
}

Error::Error(ErrorCode code, const std::string& message, double value)
    : std::runtime_error(std::string(error_name(code)) + ": " + message),
      code_(code),
      value_(value) {}

}  // namespace rnash
