#include "umlcot/error.hpp"

namespace umlcot {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingMarkers: return "MissingMarkers";
    case ErrorCode::UnbalancedBraces: return "UnbalancedBraces";
    case ErrorCode::UnterminatedNode: return "UnterminatedNode";
    case ErrorCode::ServiceUnreachable: return "ServiceUnreachable";
    case ErrorCode::ServiceMalformedResponse: return "ServiceMalformedResponse";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidReference: return "InvalidReference";
    case ErrorCode::GroupTooSmall: return "GroupTooSmall";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> line)
    : std::runtime_error(message), code_(code), line_(line) {}

}  // namespace umlcot
