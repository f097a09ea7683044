#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace umlcot {

enum class ErrorCode {
  MissingMarkers,
  UnbalancedBraces,
  UnterminatedNode,
  ServiceUnreachable,
  ServiceMalformedResponse,
  DimensionMismatch,
  InvalidReference,
  GroupTooSmall,
  EmptyCorpus,
  FileNotFound,
  MalformedLine,
  DuplicateId,
  InvalidConfig,
};

std::string_view to_string(ErrorCode code);

// Every library failure is reported through this one type; `code()` tells the
// caller which contract was violated and `line()` points into the offending
// input when there is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace umlcot
