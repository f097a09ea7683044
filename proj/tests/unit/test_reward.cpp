#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "../support/mock_embed_server.hpp"
#include "umlcot/error.hpp"
#include "umlcot/reward.hpp"

using namespace umlcot;
using namespace umlcot::reward;

namespace {

const std::string kReference = R"(@startuml
start
partition "Main Messy Areas Identification" {
  :Desk covered with papers;
  :Clothes on the floor;
}
partition "Cleaning Priority Order" {
  :Floor first;
  :Desk second;
}
partition "Specific Cleaning Steps" {
  :Pick up clothes and put them in the basket;
  :Stack the papers;
  :Wipe the desk;
}
stop
@enduml)";

std::string tagged(const std::string& answer) {
  return "<think>@startuml\nclass Room\n@enduml</think><answer>" + answer + "</answer>";
}

// Independent oracle: repeatedly pick the best free cell by scanning, with
// ties resolved toward the smaller (row, col).
std::vector<MatchPair> oracle_greedy(const std::vector<std::vector<double>>& sim, std::size_t cols) {
  std::vector<MatchPair> out;
  std::set<std::size_t> used_rows, used_cols;
  while (true) {
    bool found = false;
    MatchPair best;
    for (std::size_t i = 0; i < sim.size(); ++i) {
      if (used_rows.count(i)) continue;
      for (std::size_t j = 0; j < cols; ++j) {
        if (used_cols.count(j)) continue;
        if (!found || sim[i][j] > best.similarity) {
          best = {i, j, sim[i][j]};
          found = true;
        }
      }
    }
    if (!found) return out;
    used_rows.insert(best.gt_index);
    used_cols.insert(best.pred_index);
    out.push_back(best);
  }
}

void check_partition_invariants(const PartitionMatch& m, std::size_t n_gt, std::size_t n_pred) {
  std::vector<int> gt(n_gt, 0), pred(n_pred, 0);
  for (const auto& p : m.pairs) {
    ++gt.at(p.gt_index);
    ++pred.at(p.pred_index);
  }
  for (auto i : m.unmatched_gt) ++gt.at(i);
  for (auto j : m.unmatched_pred) ++pred.at(j);
  for (int c : gt) CHECK(c == 1);
  for (int c : pred) CHECK(c == 1);
}

}  // namespace

TEST_CASE("canonical_partition") {
  CHECK(canonical_partition("Main Messy Areas Identification") == CanonicalPartition::MessyAreas);
  CHECK(canonical_partition("Main Messy Areas") == CanonicalPartition::MessyAreas);
  CHECK_FALSE(canonical_partition("Kitchen Zone").has_value());
  CHECK(canonical_partition("  main   MESSY areas:") == CanonicalPartition::MessyAreas);
  CHECK(canonical_partition("1. Main messy areas identification") == CanonicalPartition::MessyAreas);
  CHECK(canonical_partition("Cleaning Priority Order") == CanonicalPartition::PriorityOrder);
  CHECK(canonical_partition("Cleaning Priority Orde") == CanonicalPartition::PriorityOrder);
  CHECK(canonical_partition("(iii) Specific cleaning steps and organization methods") ==
        CanonicalPartition::CleaningSteps);
  CHECK_FALSE(canonical_partition("Cleaning Steps").has_value());
  CHECK_FALSE(canonical_partition("").has_value());
}

TEST_CASE("greedy_match: examples") {
  auto single = greedy_match(SimilarityMatrix{{1.0}});
  CHECK(single.pairs == std::vector<MatchPair>{{0, 0, 1.0}});
  CHECK(single.unmatched_gt.empty());

  // Tie at 0.9 goes to (0,0); the optimal assignment (0,1)+(1,0) = 1.7 is
  // not what greedy returns (0.9 + 0.1 = 1.0).
  auto tie = greedy_match(SimilarityMatrix{{0.9, 0.8}, {0.9, 0.1}});
  CHECK(tie.pairs == std::vector<MatchPair>{{0, 0, 0.9}, {1, 1, 0.1}});
  double greedy_total = 0.0;
  for (const auto& p : tie.pairs) greedy_total += p.similarity;
  const double optimal_total = std::max(0.9 + 0.1, 0.8 + 0.9);
  CHECK(optimal_total == doctest::Approx(1.7));
  CHECK(greedy_total < optimal_total);

  auto tall = greedy_match(SimilarityMatrix{{0.7}, {0.6}});
  CHECK(tall.pairs == std::vector<MatchPair>{{0, 0, 0.7}});
  CHECK(tall.unmatched_gt == std::vector<std::size_t>{1});
  CHECK(tall.unmatched_pred.empty());
}

TEST_CASE("greedy_match: empty sides") {
  auto no_pred = greedy_match(SimilarityMatrix(3, 0));
  CHECK(no_pred.pairs.empty());
  CHECK(no_pred.unmatched_gt == std::vector<std::size_t>{0, 1, 2});
  auto no_gt = greedy_match(SimilarityMatrix(0, 2));
  CHECK(no_gt.unmatched_pred == std::vector<std::size_t>{0, 1});
  auto none = greedy_match(SimilarityMatrix{});
  CHECK(none.pairs.empty());
}

TEST_CASE("property: greedy_match equals the scanning oracle") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> dim(0, 6);
  std::uniform_int_distribution<int> coarse(0, 4);
  std::uniform_real_distribution<double> fine(-1.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto rows = dim(rng), cols = dim(rng);
    std::vector<std::vector<double>> raw(rows, std::vector<double>(cols));
    SimilarityMatrix sim(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        raw[i][j] = trial % 2 ? coarse(rng) * 0.25 : fine(rng);
        sim(i, j) = raw[i][j];
      }
    }
    auto got = greedy_match(sim);
    CHECK(got.pairs == oracle_greedy(raw, cols));
    check_partition_invariants(got, rows, cols);
  }
}

TEST_CASE("accuracy_reward_uml: missing markers score zero") {
  auto ref = uml::parse_activity(kReference);
  embed::BuiltinEmbedder e;
  auto r = accuracy_reward_uml(ref, "partition \"Main Messy Areas\" { :Desk; }", e);
  CHECK(r.reward == 0.0);
  CHECK(r.trace.status == TraceStatus::MissingMarkers);
  CHECK(r.trace.total_gt_nodes == 7);
  for (const auto& [id, m] : r.trace.per_partition) CHECK(m.pairs.empty());
}

TEST_CASE("accuracy_reward_uml: self-match is exactly 1") {
  auto ref = uml::parse_activity(kReference);
  embed::BuiltinEmbedder e;
  auto r = accuracy_reward_uml(ref, kReference, e);
  CHECK(r.reward == 1.0);
  CHECK(r.trace.status == TraceStatus::Scored);
  CHECK(r.trace.total_gt_nodes == 7);
  CHECK(r.trace.total_pred_nodes == 7);
  for (const auto& [id, m] : r.trace.per_partition) {
    for (const auto& p : m.pairs) {
      CHECK(p.similarity == 1.0);
      CHECK(p.gt_index == p.pred_index);
    }
    CHECK(m.unmatched_gt.empty());
  }
}

TEST_CASE("accuracy_reward_uml: missing partition contributes zeros") {
  auto ref = uml::parse_activity(
      "@startuml\npartition \"Main Messy Areas\" { :dusty shelf; }\n"
      "partition \"Specific Cleaning Steps\" { :dust the shelf; }\n@enduml");
  embed::BuiltinEmbedder e;
  auto r = accuracy_reward_uml(ref, "@startuml\npartition \"Main Messy Areas\" { :dusty shelf; }\n@enduml", e);
  // (1.0 + 0.0) / 2
  CHECK(r.reward == 0.5);
  CHECK(r.trace.per_partition.at(CanonicalPartition::CleaningSteps).partition_missing_in_pred);
  CHECK(r.trace.per_partition.at(CanonicalPartition::CleaningSteps).unmatched_gt ==
        std::vector<std::size_t>{0});
}

TEST_CASE("accuracy_reward_uml: parse errors score zero and are recorded") {
  auto ref = uml::parse_activity(kReference);
  embed::BuiltinEmbedder e;
  auto r = accuracy_reward_uml(ref, "@startuml\npartition \"Main Messy Areas\" {\n:Desk;\n@enduml", e);
  CHECK(r.reward == 0.0);
  CHECK(r.trace.status == TraceStatus::ParseError);
  REQUIRE(r.trace.error.has_value());
  CHECK(r.trace.error->find("UnbalancedBraces") != std::string::npos);
}

TEST_CASE("accuracy_reward_uml: extra partitions and orphans are ignored for reward") {
  auto ref = uml::parse_activity("@startuml\npartition \"Main Messy Areas\" { :sink; }\n@enduml");
  embed::BuiltinEmbedder e;
  auto r = accuracy_reward_uml(
      ref, "@startuml\n:open window;\npartition \"Kitchen\" { :sink; }\npartition \"Main Messy Areas\" { :sink; }\n@enduml", e);
  CHECK(r.reward == 1.0);
  CHECK(r.trace.extra_pred_nodes == 2);
  CHECK(r.trace.total_pred_nodes == 3);
}

TEST_CASE("accuracy_reward_uml: invalid reference") {
  embed::BuiltinEmbedder e;
  auto ref = uml::parse_activity("@startuml\npartition \"Kitchen\" { :sink; }\n@enduml");
  try {
    accuracy_reward_uml(ref, kReference, e);
    FAIL("expected InvalidReference");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::InvalidReference);
  }
  CHECK_THROWS_AS(Reference::uml("@startuml\n:a;\n@enduml"), Error);
  CHECK_THROWS_AS(Reference::uml("no markers"), Error);
  CHECK_THROWS_AS(Reference::text(""), Error);
}

TEST_CASE("accuracy_reward_text") {
  embed::BuiltinEmbedder e;
  CHECK(accuracy_reward_text("wipe the table", "wipe the table", e) == 1.0);
  CHECK(accuracy_reward_text("wipe the table", "", e) == 0.0);
  CHECK(accuracy_reward_text("wipe the table", "wash windows", e) == 0.0);
  const double partial = accuracy_reward_text("wipe the table", "wipe the window", e);
  CHECK(partial > 0.0);
  CHECK(partial < 1.0);
}

TEST_CASE("total_reward: composition cases") {
  embed::BuiltinEmbedder e;
  const auto ref = Reference::uml(kReference);

  auto perfect = total_reward(tagged(kReference), ref, e);
  CHECK(perfect.format_reward == 1.0);
  CHECK(perfect.accuracy_reward == 1.0);
  CHECK(perfect.total == 2.0);

  auto untagged = total_reward(kReference, ref, e);
  CHECK(untagged.total == 0.0);
  CHECK(untagged.trace->status == TraceStatus::NoAnswer);

  auto no_markers = total_reward(tagged("partition \"Main Messy Areas\" { :Desk; }"), ref, e);
  CHECK(no_markers.format_reward == 1.0);
  CHECK(no_markers.accuracy_reward == 0.0);
  CHECK(no_markers.total == 1.0);

  // Answer present without think: accuracy still counts, format does not.
  auto answer_only = total_reward("<answer>" + kReference + "</answer>", ref, e);
  CHECK(answer_only.total == 1.0);

  const auto text_ref = Reference::text("wipe the table then mop the floor");
  auto text = total_reward("<think>t</think><answer>wipe the table then mop the floor</answer>", text_ref, e);
  CHECK(text.total == 2.0);
  CHECK(text.mode == Mode::Text);
  CHECK_FALSE(text.trace.has_value());
}

TEST_CASE("total_reward via config and through the service backend") {
  const auto ref = Reference::uml(kReference);
  CHECK(total_reward(tagged(kReference), ref, embed::EmbedderConfig{}).total == 2.0);

  testing::MockEmbedServer server(128);
  embed::EmbedderConfig cfg;
  cfg.backend = embed::Backend::Service;
  cfg.endpoint = server.endpoint();
  // Perfect-prediction identity holds for any embedder.
  CHECK(total_reward(tagged(kReference), ref, cfg).accuracy_reward == 1.0);
}

namespace {

const std::vector<std::string> kVocabulary{"desk", "floor", "clothes", "papers", "basket", "wipe",
                                           "stack", "mop", "shelf", "dust", "bed", "sheets"};

std::string random_label(std::mt19937& rng) {
  std::uniform_int_distribution<std::size_t> word(0, kVocabulary.size() - 1);
  std::uniform_int_distribution<int> len(1, 3);
  std::string out;
  for (int i = len(rng); i > 0; --i) out += (out.empty() ? "" : " ") + kVocabulary[word(rng)];
  return out;
}

std::string random_plan(std::mt19937& rng, std::vector<std::vector<std::string>>& sections) {
  static const char* names[] = {"Main Messy Areas Identification", "Cleaning Priority Order",
                                "Specific Cleaning Steps"};
  std::uniform_int_distribution<int> count(0, 4);
  std::string out = "@startuml\n";
  sections.assign(3, {});
  for (int s = 0; s < 3; ++s) {
    const int n = count(rng);
    if (n == 0 && rng() % 2) continue;
    out += std::string("partition \"") + names[s] + "\" {\n";
    for (int i = 0; i < n; ++i) {
      sections[static_cast<std::size_t>(s)].push_back(random_label(rng));
      out += "  :" + sections[static_cast<std::size_t>(s)].back() + ";\n";
    }
    out += "}\n";
  }
  return out + "@enduml";
}

}  // namespace

TEST_CASE("property: range, self-identity, determinism, monotone damage") {
  std::mt19937 rng(314);
  embed::BuiltinEmbedder e;
  int scored = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::vector<std::string>> ref_sections, pred_sections;
    const auto ref_src = random_plan(rng, ref_sections);
    const auto pred_src = random_plan(rng, pred_sections);
    const auto ref = uml::parse_activity(ref_src);
    if (canonical_node_count(ref) == 0) continue;
    ++scored;

    CHECK(accuracy_reward_uml(ref, ref_src, e).reward == 1.0);

    const auto r = accuracy_reward_uml(ref, pred_src, e);
    CHECK(r.reward >= 0.0);
    CHECK(r.reward <= 1.0);
    CHECK(accuracy_reward_uml(ref, pred_src, e).reward == r.reward);
    for (const auto& [id, m] : r.trace.per_partition) {
      check_partition_invariants(m, m.gt_labels.size(), m.pred_labels.size());
    }

    // Remove each matched prediction node in turn; reward must not rise.
    const auto pred = uml::parse_activity(pred_src);
    for (const auto& [id, m] : r.trace.per_partition) {
      for (const auto& pair : m.pairs) {
        auto damaged = pred;
        for (auto& p : damaged.partitions) {
          if (canonical_partition(p.name) == id) {
            p.nodes.erase(p.nodes.begin() + static_cast<std::ptrdiff_t>(pair.pred_index));
            break;
          }
        }
        CHECK(accuracy_reward_uml(ref, uml::render_activity(damaged), e).reward <= r.reward);
      }
    }
  }
  CHECK(scored > 100);
}
