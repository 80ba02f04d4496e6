#include "aukit/errors.hpp"

namespace aukit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::MalformedNumber: return "MalformedNumber";
    case ErrorCode::OverlappingPhases: return "OverlappingPhases";
    case ErrorCode::NegativeDuration: return "NegativeDuration";
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::UnknownPhase: return "UnknownPhase";
    case ErrorCode::PhaseOutOfBounds: return "PhaseOutOfBounds";
    case ErrorCode::DuplicateParticipant: return "DuplicateParticipant";
    case ErrorCode::FileError: return "FileError";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::KOutOfRange: return "KOutOfRange";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::EmptyData: return "EmptyData";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::SingleCluster: return "SingleCluster";
    case ErrorCode::BadFraction: return "BadFraction";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::InputTooShort: return "InputTooShort";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::EmptyTest: return "EmptyTest";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace aukit
