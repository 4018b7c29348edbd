// Error type shared by every module of the toolkit.
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace meanfield {

enum class ErrorCode {
  // model validation
  NonSymmetricJ,
  BadAlpha,
  DegenerateMeasure,
  BadMeasure,
  NonPositiveDiagonal,
  DimensionMismatch,
  InvalidConfiguration,
  // forward solver
  DomainError,
  UnsupportedMeasure,
  NoConvergence,
  NotAMaximum,
  UnsupportedDegeneracy,
  // exact enumeration
  OffLattice,
  LatticeTooLarge,
  NonIntegerSize,
  EmptyCondition,
  // limit laws
  DegenerateMaximum,
  SingularSystem,
  NotK1,
  NonPositiveDefiniteA,
  NotPositiveDefiniteResult,
  MixedTypes,
  NonUniqueMaximum,
  Unnormalized,
  NoDensity,
  // inverse problem
  EmptySample,
  InconsistentRows,
  ZeroVariance,
  MagnetizationSaturated,
  SingularChi,
  // front end
  ConfigParse,
  IoError,
  Internal,
};

std::string_view error_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const { return error_name(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace meanfield
