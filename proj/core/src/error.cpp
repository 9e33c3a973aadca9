#include "pitcheval/error.hpp"

namespace pitcheval {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::BadValue: return "BadValue";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::OutOfCanvas: return "OutOfCanvas";
    case ErrorCode::IncompleteInning: return "IncompleteInning";
    case ErrorCode::NoEligiblePitches: return "NoEligiblePitches";
    case ErrorCode::EmptyDenominator: return "EmptyDenominator";
    case ErrorCode::MissingAggregate: return "MissingAggregate";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NoTreated: return "NoTreated";
    case ErrorCode::NoControl: return "NoControl";
    case ErrorCode::PropensityOutOfRange: return "PropensityOutOfRange";
    case ErrorCode::TooFewValidResamples: return "TooFewValidResamples";
    case ErrorCode::UnknownFeature: return "UnknownFeature";
    case ErrorCode::EmptyPartition: return "EmptyPartition";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::MissingManifest: return "MissingManifest";
    case ErrorCode::DegenerateAssignment: return "DegenerateAssignment";
    case ErrorCode::NonterminatingChain: return "NonterminatingChain";
    case ErrorCode::MissingArtifact: return "MissingArtifact";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Error";
}

}  // namespace pitcheval
