#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pitcheval {

enum class ErrorCode {
  // ingest
  MissingColumn,
  BadValue,
  EmptyFile,
  OutOfCanvas,
  // valuation
  IncompleteInning,
  // features
  NoEligiblePitches,
  EmptyDenominator,
  MissingAggregate,
  // propensity
  SingleClass,
  DimensionMismatch,
  // estimate
  NoTreated,
  NoControl,
  PropensityOutOfRange,
  TooFewValidResamples,
  UnknownFeature,
  EmptyPartition,
  // diagnostics
  Degenerate,
  EmptyGroup,
  // synth
  MissingManifest,
  DegenerateAssignment,
  NonterminatingChain,
  // cli / io
  MissingArtifact,
  InvalidConfig,
  IoFailure,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pitcheval
