#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace extrinsic {

enum class ErrorCode {
  InvalidArgument,
  // registration
  MismatchedFrames,
  DegenerateMarkers,
  TooFewMarkers,
  // estimators
  TooFewFrames,
  IllConditioned,
  AmbiguousDirection,
  RankDeficientBeyondLine,
  // simulator
  InvalidSchedule,
  // io
  ParseError,
  SchemaVersionMismatch,
  NonFiniteValue,
  IoFailure,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MismatchedFrames: return "MismatchedFrames";
    case ErrorCode::DegenerateMarkers: return "DegenerateMarkers";
    case ErrorCode::TooFewMarkers: return "TooFewMarkers";
    case ErrorCode::TooFewFrames: return "TooFewFrames";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::AmbiguousDirection: return "AmbiguousDirection";
    case ErrorCode::RankDeficientBeyondLine: return "RankDeficientBeyondLine";
    case ErrorCode::InvalidSchedule: return "InvalidSchedule";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

/// Single exception type for the library; callers dispatch on code().
/// frame_index() is set when the failure is attributable to one frame.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> frame_index = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        frame_index_(frame_index) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> frame_index() const noexcept { return frame_index_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> frame_index_;
};

}  // namespace extrinsic
