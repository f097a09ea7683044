#pragma once

// Evaluation metrics over match traces: mean matched similarity plus
// threshold-based precision / recall / F1, per instance and per corpus.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "umlcot/reward.hpp"

namespace umlcot::metrics {

inline constexpr double kDefaultThreshold = 0.5;

struct InstanceMetrics {
  double similarity = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Recall, reported under the name used for task execution success.
  double success_rate = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t matched_pairs = 0;
  double threshold = kDefaultThreshold;
};

/// Macro averages: arithmetic means of the per-instance fields.
struct AggregateMetrics {
  double similarity = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double success_rate = 0.0;
  double tp = 0.0;
  double fp = 0.0;
  double fn = 0.0;
  double threshold = kDefaultThreshold;
};

/// Counts pooled over the corpus before computing the ratios.
struct MicroMetrics {
  double similarity = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

struct RewardMeans {
  double format_reward = 0.0;
  double accuracy_reward = 0.0;
  double total = 0.0;
};

/// Pairs above `threshold` are true positives; a pair at or below it counts
/// its reference node as FN and its prediction as FP. Unmatched reference
/// nodes are FN; unmatched and out-of-section predictions are FP.
InstanceMetrics instance_metrics(const reward::MatchTrace& trace,
                                 double threshold = kDefaultThreshold);

/// Text-mode plans are one evaluation unit per side.
InstanceMetrics text_instance_metrics(double similarity, bool prediction_present,
                                      double threshold = kDefaultThreshold);

/// Metrics for any scored breakdown (dispatches on its mode).
InstanceMetrics instance_metrics(const reward::RewardBreakdown& reward,
                                 double threshold = kDefaultThreshold);

/// Throws umlcot::Error(EmptyCorpus) on an empty list.
AggregateMetrics aggregate(std::span<const InstanceMetrics> instances);

MicroMetrics pooled(std::span<const InstanceMetrics> instances);

struct InstanceRecord {
  std::string id;
  InstanceMetrics metrics;
  reward::RewardBreakdown reward;
  std::map<std::string, std::string> meta;
};

struct CorpusReport {
  std::vector<InstanceRecord> per_instance;  // sorted by id
  AggregateMetrics aggregate;
  MicroMetrics micro;
  RewardMeans rewards;
  std::size_t count = 0;
};

/// Sorts records by id and fills in the corpus-level fields.
CorpusReport build_report(std::vector<InstanceRecord> records);

/// One row per instance, fixed column order, shortest round-trip numbers.
std::string report_csv(const CorpusReport& report);

}  // namespace umlcot::metrics
