#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace umlcot::tagged {

// Model output split into the reasoning block (`<think>`) and the final
// answer block (`<answer>`). Tags are matched exactly and case-sensitively;
// each block is the text between the first opening tag and the first closing
// tag after it.
struct TaggedOutput {
  std::string raw;
  std::optional<std::string> think;
  std::optional<std::string> answer;
  bool format_valid = false;

  bool operator==(const TaggedOutput&) const = default;
};

TaggedOutput extract(std::string_view raw);

// 1.0 when both blocks are present (even if empty), 0.0 otherwise.
double format_reward(std::string_view raw);

}  // namespace umlcot::tagged
