#include <algorithm>

#include "umlcot/error.hpp"
#include "umlcot/format.hpp"
#include "umlcot/metrics.hpp"

namespace umlcot::metrics {

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

double harmonic(double p, double r) { return (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

// Plain mean, except that a list of equal values averages to exactly that
// value (a running sum of n copies need not divide back evenly).
template <class T, class F>
double mean_of(std::span<const T> items, F field) {
  const double first = field(items.front());
  double sum = 0.0;
  bool constant = true;
  for (const auto& item : items) {
    const double v = field(item);
    sum += v;
    constant = constant && v == first;
  }
  return constant ? first : sum / static_cast<double>(items.size());
}

void finish(InstanceMetrics& m) {
  const auto tp = static_cast<double>(m.tp);
  m.precision = ratio(tp, tp + static_cast<double>(m.fp));
  m.recall = ratio(tp, tp + static_cast<double>(m.fn));
  m.f1 = harmonic(m.precision, m.recall);
  m.success_rate = m.recall;
}

}  // namespace

InstanceMetrics instance_metrics(const reward::MatchTrace& trace, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "threshold must lie in [0, 1]");
  }
  InstanceMetrics m;
  m.threshold = threshold;
  double similarity_sum = 0.0;
  for (const auto& [id, part] : trace.per_partition) {
    for (const auto& p : part.pairs) {
      similarity_sum += p.similarity;
      ++m.matched_pairs;
      if (p.similarity > threshold) {
        ++m.tp;
      } else {
        ++m.fn;
        ++m.fp;
      }
    }
    m.fn += part.unmatched_gt.size();
    m.fp += part.unmatched_pred.size();
  }
  m.fp += trace.extra_pred_nodes;
  m.similarity = ratio(similarity_sum, static_cast<double>(m.matched_pairs));
  finish(m);
  return m;
}

InstanceMetrics text_instance_metrics(double similarity, bool prediction_present,
                                      double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "threshold must lie in [0, 1]");
  }
  InstanceMetrics m;
  m.threshold = threshold;
  if (prediction_present) {
    m.matched_pairs = 1;
    m.similarity = similarity;
    if (similarity > threshold) {
      m.tp = 1;
    } else {
      m.fn = 1;
      m.fp = 1;
    }
  } else {
    m.fn = 1;
  }
  finish(m);
  return m;
}

InstanceMetrics instance_metrics(const reward::RewardBreakdown& reward, double threshold) {
  if (reward.mode == reward::Mode::Uml && reward.trace) {
    return instance_metrics(*reward.trace, threshold);
  }
  return text_instance_metrics(reward.accuracy_reward, reward.answer_present, threshold);
}

AggregateMetrics aggregate(std::span<const InstanceMetrics> instances) {
  if (instances.empty()) throw Error(ErrorCode::EmptyCorpus, "cannot aggregate an empty corpus");
  AggregateMetrics a;
  a.similarity = mean_of(instances, [](const auto& m) { return m.similarity; });
  a.precision = mean_of(instances, [](const auto& m) { return m.precision; });
  a.recall = mean_of(instances, [](const auto& m) { return m.recall; });
  a.f1 = mean_of(instances, [](const auto& m) { return m.f1; });
  a.success_rate = mean_of(instances, [](const auto& m) { return m.success_rate; });
  a.tp = mean_of(instances, [](const auto& m) { return static_cast<double>(m.tp); });
  a.fp = mean_of(instances, [](const auto& m) { return static_cast<double>(m.fp); });
  a.fn = mean_of(instances, [](const auto& m) { return static_cast<double>(m.fn); });
  a.threshold = instances.front().threshold;
  return a;
}

MicroMetrics pooled(std::span<const InstanceMetrics> instances) {
  MicroMetrics mm;
  double similarity_sum = 0.0;
  std::size_t pairs = 0;
  for (const auto& m : instances) {
    mm.tp += m.tp;
    mm.fp += m.fp;
    mm.fn += m.fn;
    similarity_sum += m.similarity * static_cast<double>(m.matched_pairs);
    pairs += m.matched_pairs;
  }
  const auto tp = static_cast<double>(mm.tp);
  mm.precision = ratio(tp, tp + static_cast<double>(mm.fp));
  mm.recall = ratio(tp, tp + static_cast<double>(mm.fn));
  mm.f1 = harmonic(mm.precision, mm.recall);
  mm.similarity = ratio(similarity_sum, static_cast<double>(pairs));
  return mm;
}

CorpusReport build_report(std::vector<InstanceRecord> records) {
  if (records.empty()) throw Error(ErrorCode::EmptyCorpus, "corpus has no instances");
  std::sort(records.begin(), records.end(),
            [](const InstanceRecord& a, const InstanceRecord& b) { return a.id < b.id; });
  CorpusReport report;
  std::vector<InstanceMetrics> metrics;
  metrics.reserve(records.size());
  for (const auto& r : records) metrics.push_back(r.metrics);
  const std::span<const InstanceRecord> all(records);
  report.rewards.format_reward = mean_of(all, [](const auto& r) { return r.reward.format_reward; });
  report.rewards.accuracy_reward =
      mean_of(all, [](const auto& r) { return r.reward.accuracy_reward; });
  report.rewards.total = mean_of(all, [](const auto& r) { return r.reward.total; });
  report.aggregate = aggregate(metrics);
  report.micro = pooled(metrics);
  report.count = records.size();
  report.per_instance = std::move(records);
  return report;
}

std::string report_csv(const CorpusReport& report) {
  std::string out =
      "id,similarity,precision,recall,success_rate,f1,format_reward,accuracy_reward,total\n";
  for (const auto& r : report.per_instance) {
    const auto& m = r.metrics;
    out += csv_field(r.id);
    for (double v : {m.similarity, m.precision, m.recall, m.success_rate, m.f1,
                     r.reward.format_reward, r.reward.accuracy_reward, r.reward.total}) {
      out += ',';
      out += format_number(v);
    }
    out += '\n';
  }
  return out;
}

}  // namespace umlcot::metrics
