#pragma once

// JSONL corpora of (reference, prediction) pairs and the batch evaluation
// that turns them into a CorpusReport.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "umlcot/embed.hpp"
#include "umlcot/metrics.hpp"
#include "umlcot/reward.hpp"

namespace umlcot::corpus {

struct ReferenceSpec {
  reward::Mode format = reward::Mode::Uml;
  std::string content;
};

// One JSONL line:
//   {"id": "...", "reference": {"format": "uml"|"text", "content": "..."},
//    "prediction": "...", "meta": {"key": "value", ...}}
struct CorpusInstance {
  std::string id;
  ReferenceSpec reference;
  std::string prediction;
  std::map<std::string, std::string> meta;
};

struct RunConfig {
  embed::EmbedderConfig embedder;
  double threshold = metrics::kDefaultThreshold;
  double epsilon = 1e-4;
  std::size_t group_size = 8;
  std::optional<reward::Mode> mode_override;
  std::uint64_t seed = 0;

  // Throws umlcot::Error(InvalidConfig).
  void validate() const;
};

/// Throws umlcot::Error with FileNotFound, MalformedLine (1-based line
/// number attached) or DuplicateId.
std::vector<CorpusInstance> load_corpus(const std::filesystem::path& path);
std::vector<CorpusInstance> parse_corpus(std::istream& in);

/// Builds the reference for `instance` under the effective mode.
reward::Reference make_reference(const CorpusInstance& instance,
                                 std::optional<reward::Mode> mode_override = std::nullopt);

/// Scores every instance (on up to `jobs` threads) and assembles the report
/// in id order. Bad predictions score zero; they never abort the run.
metrics::CorpusReport evaluate(const std::vector<CorpusInstance>& corpus, const RunConfig& config,
                               const embed::Embedder& embedder, std::size_t jobs = 1);

}  // namespace umlcot::corpus
