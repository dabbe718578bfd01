#pragma once

#include <stdexcept>
#include <string>

namespace actmap {

enum class ErrorKind {
  ShapeMismatch,
  DegenerateOutput,
  MissingFile,
  MalformedDescriptor,
  ChannelChainBroken,
  ResolutionMismatch,
  MapTooSmall,
  DimensionMismatch,
  DegenerateInput,
  CholeskyFailure,
  ConvergenceFailure,
  DomainError,
  TooFewReferences,
  MissingColumn,
  MissingImageFile,
  DuplicatePairId,
  UnsupportedFormat,
  CorruptFile,
  IoError,
  Validation,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::DegenerateOutput: return "DegenerateOutput";
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::MalformedDescriptor: return "MalformedDescriptor";
    case ErrorKind::ChannelChainBroken: return "ChannelChainBroken";
    case ErrorKind::ResolutionMismatch: return "ResolutionMismatch";
    case ErrorKind::MapTooSmall: return "MapTooSmall";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::CholeskyFailure: return "CholeskyFailure";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::TooFewReferences: return "TooFewReferences";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::MissingImageFile: return "MissingImageFile";
    case ErrorKind::DuplicatePairId: return "DuplicatePairId";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::CorruptFile: return "CorruptFile";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::Validation: return "Validation";
  }
  return "Unknown";
}

/// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

/// Process exit code for the command line front end.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Validation:
    case ErrorKind::DomainError:
    case ErrorKind::TooFewReferences:
      return 2;
    case ErrorKind::ConvergenceFailure:
    case ErrorKind::CholeskyFailure:
      return 4;
    default:
      return 3;
  }
}

}  // namespace actmap
