#include "trackkit/error.hpp"

namespace trackkit {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::SumMismatch: return "SumMismatch";
    case ErrorCode::MalformedRuns: return "MalformedRuns";
    case ErrorCode::BadCharacter: return "BadCharacter";
    case ErrorCode::TruncatedStream: return "TruncatedStream";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::DegenerateResult: return "DegenerateResult";
    case ErrorCode::NoReferenceGroup: return "NoReferenceGroup";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::NonMonotonicFrame: return "NonMonotonicFrame";
    case ErrorCode::MissingBorderMask: return "MissingBorderMask";
    case ErrorCode::EmptyStream: return "EmptyStream";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::EmptyTimeRange: return "EmptyTimeRange";
    case ErrorCode::GridLargerThanImage: return "GridLargerThanImage";
    case ErrorCode::UnknownSequenceId: return "UnknownSequenceId";
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::ConfigViolation: return "ConfigViolation";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace trackkit
