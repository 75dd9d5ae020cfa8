#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tweetner {

enum class ErrorKind {
  MalformedLine,
  InvalidTag,
  EmptyToken,
  InvalidUtf8,
  EmptyVocab,
  InvalidParams,
  VersionMismatch,
  CorruptFile,
  TooFewPoints,
  DegenerateData,
  DimensionMismatch,
  IndexOutOfRange,
  ProviderFailure,
  ModelMissing,
  UnknownLabel,
  LengthMismatch,
  EmptyDataset,
  NonFiniteObjective,
  ShapeMismatch,
  EmptySentence,
  Io,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedLine: return "MalformedLine";
    case ErrorKind::InvalidTag: return "InvalidTag";
    case ErrorKind::EmptyToken: return "EmptyToken";
    case ErrorKind::InvalidUtf8: return "InvalidUtf8";
    case ErrorKind::EmptyVocab: return "EmptyVocab";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::CorruptFile: return "CorruptFile";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::DegenerateData: return "DegenerateData";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::ProviderFailure: return "ProviderFailure";
    case ErrorKind::ModelMissing: return "ModelMissing";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::NonFiniteObjective: return "NonFiniteObjective";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::EmptySentence: return "EmptySentence";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library. The kind is what callers branch on;
/// the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace tweetner
