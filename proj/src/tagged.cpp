#include "umlcot/tagged.hpp"

namespace umlcot::tagged {

namespace {

std::optional<std::string> block(std::string_view raw, std::string_view open,
                                 std::string_view close) {
  auto begin = raw.find(open);
  if (begin == std::string_view::npos) return std::nullopt;
  begin += open.size();
  auto end = raw.find(close, begin);
  if (end == std::string_view::npos) return std::nullopt;
  return std::string(raw.substr(begin, end - begin));
}

}  // namespace

TaggedOutput extract(std::string_view raw) {
  TaggedOutput out;
  out.raw = std::string(raw);
  out.think = block(raw, "<think>", "</think>");
  out.answer = block(raw, "<answer>", "</answer>");
  out.format_valid = out.think.has_value() && out.answer.has_value();
  return out;
}

double format_reward(std::string_view raw) { return extract(raw).format_valid ? 1.0 : 0.0; }

}  // namespace umlcot::tagged
