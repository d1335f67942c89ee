#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rtdcm {

enum class ErrorCode {
  TooFewPoints,
  DegenerateSegment,
  TooFewValidSamples,
  InvalidParams,
  ClusterCountMismatch,
  DimensionMismatch,
  NonFiniteEnergy,
  SolverNotConverged,
  InvalidBracket,
  IndexRangeInvalid,
  EmptyOverlap,
  OutOfBounds,
  ParseError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::DegenerateSegment: return "DegenerateSegment";
    case ErrorCode::TooFewValidSamples: return "TooFewValidSamples";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::ClusterCountMismatch: return "ClusterCountMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteEnergy: return "NonFiniteEnergy";
    case ErrorCode::SolverNotConverged: return "SolverNotConverged";
    case ErrorCode::InvalidBracket: return "InvalidBracket";
    case ErrorCode::IndexRangeInvalid: return "IndexRangeInvalid";
    case ErrorCode::EmptyOverlap: return "EmptyOverlap";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable code. All library failures throw this.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rtdcm
