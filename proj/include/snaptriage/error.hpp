#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace snaptriage {

enum class ErrorKind {
  InvalidCategory,
  FileNotFound,
  DecodeError,
  DimensionMismatch,
  IoError,
  ManifestParseError,
  DuplicateCaseId,
  InvalidGroundTruth,
  BrokenImagePath,
  UnsupportedCategory,
  InvalidMutation,
  EmptyIgnoreReason,
  TransportError,
  Timeout,
  HttpStatusError,
  FixtureMissing,
  InvalidConfig,
  NoJsonFound,
  SchemaError,
  NoAnalyzedCases,
  MissingIgnoreDesignation,
  IfgtDesignationMissing,
};

std::string_view to_string(ErrorKind kind);

/// Base of every error thrown by the library. Callers that need to branch
/// on the failure inspect kind() rather than catching subclasses.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace snaptriage
