#include "meanfield/error.hpp"

namespace meanfield {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonSymmetricJ: return "NonSymmetricJ";
    case ErrorCode::BadAlpha: return "BadAlpha";
    case ErrorCode::DegenerateMeasure: return "DegenerateMeasure";
    case ErrorCode::BadMeasure: return "BadMeasure";
    case ErrorCode::NonPositiveDiagonal: return "NonPositiveDiagonal";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidConfiguration: return "InvalidConfiguration";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::UnsupportedMeasure: return "UnsupportedMeasure";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotAMaximum: return "NotAMaximum";
    case ErrorCode::UnsupportedDegeneracy: return "UnsupportedDegeneracy";
    case ErrorCode::OffLattice: return "OffLattice";
    case ErrorCode::LatticeTooLarge: return "LatticeTooLarge";
    case ErrorCode::NonIntegerSize: return "NonIntegerSize";
    case ErrorCode::EmptyCondition: return "EmptyCondition";
    case ErrorCode::DegenerateMaximum: return "DegenerateMaximum";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NotK1: return "NotK1";
    case ErrorCode::NonPositiveDefiniteA: return "NonPositiveDefiniteA";
    case ErrorCode::NotPositiveDefiniteResult: return "NotPositiveDefiniteResult";
    case ErrorCode::MixedTypes: return "MixedTypes";
    case ErrorCode::NonUniqueMaximum: return "NonUniqueMaximum";
    case ErrorCode::Unnormalized: return "Unnormalized";
    case ErrorCode::NoDensity: return "NoDensity";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::InconsistentRows: return "InconsistentRows";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::MagnetizationSaturated: return "MagnetizationSaturated";
    case ErrorCode::SingularChi: return "SingularChi";
    case ErrorCode::ConfigParse: return "ConfigParse";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace meanfield
