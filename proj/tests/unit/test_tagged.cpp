#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <string>

#include "umlcot/tagged.hpp"

using namespace umlcot::tagged;

TEST_CASE("extract: both blocks") {
  auto t = extract("<think>T</think><answer>A</answer>");
  CHECK(t.think == "T");
  CHECK(t.answer == "A");
  CHECK(t.format_valid);
  CHECK(t.raw == "<think>T</think><answer>A</answer>");
}

TEST_CASE("extract: empty input") {
  auto t = extract("");
  CHECK_FALSE(t.think.has_value());
  CHECK_FALSE(t.answer.has_value());
  CHECK_FALSE(t.format_valid);
}

TEST_CASE("extract: unclosed think is absent") {
  auto t = extract("<think>T<answer>A</answer>");
  CHECK_FALSE(t.think.has_value());
  CHECK(t.answer == "A");
  CHECK_FALSE(t.format_valid);
}

TEST_CASE("extract: first pair wins, tags are case-sensitive, order is free") {
  auto t = extract("<answer>first</answer><think>x</think><answer>second</answer>");
  CHECK(t.answer == "first");
  CHECK(t.format_valid);

  CHECK_FALSE(extract("<THINK>x</THINK><answer>a</answer>").format_valid);
  CHECK(extract("<think> multi\nline </think>\n<answer>\n@startuml\n@enduml\n</answer>").think ==
        " multi\nline ");
}

TEST_CASE("format_reward") {
  CHECK(format_reward("<think>reasoning</think><answer>plan</answer>") == 1.0);
  CHECK(format_reward("<answer>plan</answer>") == 0.0);
  CHECK(format_reward("<think></think><answer></answer>") == 1.0);
  CHECK(format_reward("") == 0.0);
}

TEST_CASE("property: format reward ignores text outside the tags") {
  std::mt19937 rng(11);
  const std::string alphabet = "abc <>/\n\t@{}:;";
  auto noise = [&] {
    std::string s;
    const auto n = std::uniform_int_distribution<int>(0, 12)(rng);
    for (int i = 0; i < n; ++i) {
      s.push_back(alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(rng)]);
    }
    return s;
  };
  const std::vector<std::string> cores{"<think>t</think><answer>a</answer>",
                                       "<answer>a</answer>", "<think>t</think>",
                                       "<think></think><answer></answer>"};
  for (int trial = 0; trial < 400; ++trial) {
    const auto& core = cores[static_cast<std::size_t>(trial) % cores.size()];
    // Noise made of characters that cannot form a tag keeps the regions intact.
    auto padded = noise() + core + noise();
    const double r = format_reward(padded);
    CHECK((r == 0.0 || r == 1.0));
    CHECK(r == format_reward(core));
    const auto t = extract(padded);
    CHECK(extract(t.raw) == t);
  }
}
