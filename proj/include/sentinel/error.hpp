#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sentinel {

enum class ErrorKind {
  MalformedRow,
  NonContiguousCycles,
  DegenerateSplit,
  InsufficientData,
  SegmentTooShort,
  DimensionMismatch,
  InsufficientWindows,
  InsufficientScores,
  LabelMismatch,
  EmptyEvaluation,
  InvalidArgument,
  Io,
  MissingArtifact,
  ConfigMismatch,
  TrainingFailure,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::NonContiguousCycles: return "NonContiguousCycles";
    case ErrorKind::DegenerateSplit: return "DegenerateSplit";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::SegmentTooShort: return "SegmentTooShort";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InsufficientWindows: return "InsufficientWindows";
    case ErrorKind::InsufficientScores: return "InsufficientScores";
    case ErrorKind::LabelMismatch: return "LabelMismatch";
    case ErrorKind::EmptyEvaluation: return "EmptyEvaluation";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
    case ErrorKind::MissingArtifact: return "MissingArtifact";
    case ErrorKind::ConfigMismatch: return "ConfigMismatch";
    case ErrorKind::TrainingFailure: return "TrainingFailure";
  }
  return "Unknown";
}

// Every failure in the toolkit surfaces as this exception type; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) throw Error(kind, message);
}

}  // namespace sentinel
