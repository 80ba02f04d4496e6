#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aukit {

enum class ErrorCode {
  EmptySeries,
  MissingColumn,
  OutOfRange,
  MalformedNumber,
  OverlappingPhases,
  NegativeDuration,
  MalformedFile,
  UnknownPhase,
  PhaseOutOfBounds,
  DuplicateParticipant,
  FileError,
  EmptyInput,
  EmptyGroup,
  InsufficientSamples,
  DimensionMismatch,
  KOutOfRange,
  KTooLarge,
  EmptyData,
  SingularCovariance,
  SingleCluster,
  BadFraction,
  ClassTooSmall,
  InputTooShort,
  LengthMismatch,
  SingleClass,
  NonFiniteLoss,
  EmptyTest,
  InvalidSpec,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

// All recoverable data and validation failures surface as this type.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace aukit
