#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace rnash {

enum class ErrorCode {
  // lq-core
  NonSymmetricCost,
  DimensionMismatch,
  EmptyStencil,
  IndexOutOfRange,
  // seq-tools
  NonPositiveAlpha,
  NonPositiveEntry,
  WindowMismatch,
  TailBoundFailure,
  // riccati-solver
  BlowUpDetected,
  TruncationTooSmall,
  BallEscape,
  NoContraction,
  DominationViolated,
  // genfun
  GatheringFailed,
  CompatibilityFailed,
  NumericalSingularity,
  ImaginaryResidue,
  AliasingDetected,
  UncertifiedSymbol,
  InvalidPlan,
  // mc-sim
  ExplodingState,
  BadStep,
  UncertifiedFlow,
  InadmissibleDeviation,
  NotPositiveSemidefinite,
  // meanfield
  TargetInfeasible,
  MonotonicityBarrierCrossed,
  // cli
  ConfigError,
};

// Coarse classes used for CLI exit codes.
enum class ErrorClass { Certification, Numerical, Config };

[[nodiscard]] const char* error_name(ErrorCode code) noexcept;
[[nodiscard]] ErrorClass error_class(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        double value = std::numeric_limits<double>::quiet_NaN());

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  // Optional numeric payload: blow-up time, crossing time, offending index, ...
  [[nodiscard]] double value() const noexcept { return value_; }

 private:
  ErrorCode code_;
  double value_;
};

}  // namespace rnash
