#include "snaptriage/error.hpp"

namespace snaptriage {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidCategory: return "InvalidCategory";
    case ErrorKind::FileNotFound: return "FileNotFound";
    case ErrorKind::DecodeError: return "DecodeError";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ManifestParseError: return "ManifestParseError";
    case ErrorKind::DuplicateCaseId: return "DuplicateCaseId";
    case ErrorKind::InvalidGroundTruth: return "InvalidGroundTruth";
    case ErrorKind::BrokenImagePath: return "BrokenImagePath";
    case ErrorKind::UnsupportedCategory: return "UnsupportedCategory";
    case ErrorKind::InvalidMutation: return "InvalidMutation";
    case ErrorKind::EmptyIgnoreReason: return "EmptyIgnoreReason";
    case ErrorKind::TransportError: return "TransportError";
    case ErrorKind::Timeout: return "Timeout";
    case ErrorKind::HttpStatusError: return "HttpStatusError";
    case ErrorKind::FixtureMissing: return "FixtureMissing";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::NoJsonFound: return "NoJsonFound";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::NoAnalyzedCases: return "NoAnalyzedCases";
    case ErrorKind::MissingIgnoreDesignation: return "MissingIgnoreDesignation";
    case ErrorKind::IfgtDesignationMissing: return "IfgtDesignationMissing";
  }
  return "Error";
}

}  // namespace snaptriage
