#pragma once

// Plan rewards: format reward plus semantic accuracy, either per canonical
// partition with greedy node matching (UML plans) or whole-document cosine
// (text plans).

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "umlcot/embed.hpp"
#include "umlcot/uml.hpp"

namespace umlcot::reward {

enum class CanonicalPartition { MessyAreas, PriorityOrder, CleaningSteps };

inline constexpr std::array<CanonicalPartition, 3> kCanonicalPartitions = {
    CanonicalPartition::MessyAreas, CanonicalPartition::PriorityOrder,
    CanonicalPartition::CleaningSteps};

// "messy_areas", "priority_order", "cleaning_steps"
std::string_view to_string(CanonicalPartition id);

/// Maps a partition title onto one of the three plan sections by prefix,
/// after lowercasing, collapsing whitespace, dropping a leading enumerator
/// ("1.", "(ii)") and trailing punctuation.
std::optional<CanonicalPartition> canonical_partition(std::string_view name);

/// Row-major similarity matrix: rows are reference nodes, columns predictions.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  SimilarityMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  SimilarityMatrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct MatchPair {
  std::size_t gt_index = 0;
  std::size_t pred_index = 0;
  double similarity = 0.0;

  bool operator==(const MatchPair&) const = default;
};

struct PartitionMatch {
  std::vector<MatchPair> pairs;
  std::vector<std::size_t> unmatched_gt;
  std::vector<std::size_t> unmatched_pred;
  bool partition_missing_in_pred = false;
  // Node labels on each side, for audit output.
  std::vector<std::string> gt_labels;
  std::vector<std::string> pred_labels;

  bool operator==(const PartitionMatch&) const = default;
};

/// Visits cells by similarity descending, ties by row then column ascending,
/// and accepts a cell when both its row and column are still free.
PartitionMatch greedy_match(const SimilarityMatrix& sim);

enum class TraceStatus { Scored, MissingMarkers, ParseError, NoAnswer };

std::string_view to_string(TraceStatus status);

struct MatchTrace {
  std::map<CanonicalPartition, PartitionMatch> per_partition;
  std::size_t total_gt_nodes = 0;
  std::size_t total_pred_nodes = 0;
  // Predicted nodes outside the canonical partitions (orphans included).
  std::size_t extra_pred_nodes = 0;
  TraceStatus status = TraceStatus::Scored;
  std::optional<std::string> error;
};

enum class Mode { Uml, Text };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view name);

/// Reference plan, validated for its mode at construction.
class Reference {
 public:
  /// Throws umlcot::Error(InvalidReference) when the source does not parse or
  /// has no node in any canonical partition.
  static Reference uml(std::string source);
  /// Throws umlcot::Error(InvalidReference) on an empty plan.
  static Reference text(std::string plan);

  Mode mode() const { return mode_; }
  const std::string& content() const { return content_; }
  const uml::ActivityDiagram& diagram() const { return *diagram_; }

 private:
  Mode mode_ = Mode::Text;
  std::string content_;
  std::optional<uml::ActivityDiagram> diagram_;
};

struct RewardBreakdown {
  double format_reward = 0.0;
  double accuracy_reward = 0.0;
  double total = 0.0;
  Mode mode = Mode::Uml;
  std::optional<MatchTrace> trace;
  // Whether an answer block was extracted at all.
  bool answer_present = false;
};

struct UmlAccuracy {
  double reward = 0.0;
  MatchTrace trace;
};

std::size_t canonical_node_count(const uml::ActivityDiagram& diagram);

/// Mean over reference nodes of their matched similarity (0 when unmatched
/// or when their partition is missing from the prediction), clamped to [0, 1].
UmlAccuracy accuracy_reward_uml(const uml::ActivityDiagram& reference,
                                std::string_view pred_answer, const embed::Embedder& embedder);

double accuracy_reward_text(std::string_view ref_plan, std::string_view pred_answer,
                            const embed::Embedder& embedder);

RewardBreakdown total_reward(std::string_view raw_output, const Reference& reference,
                             const embed::Embedder& embedder);

RewardBreakdown total_reward(std::string_view raw_output, const Reference& reference,
                             const embed::EmbedderConfig& config);

}  // namespace umlcot::reward
