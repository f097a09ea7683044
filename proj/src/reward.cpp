#include <algorithm>
#include <cctype>
#include <numeric>
#include <regex>

#include "umlcot/error.hpp"
#include "umlcot/reward.hpp"
#include "umlcot/tagged.hpp"

namespace umlcot::reward {

std::string_view to_string(CanonicalPartition id) {
  switch (id) {
    case CanonicalPartition::MessyAreas: return "messy_areas";
    case CanonicalPartition::PriorityOrder: return "priority_order";
    case CanonicalPartition::CleaningSteps: return "cleaning_steps";
  }
  return "messy_areas";
}

std::string_view to_string(TraceStatus status) {
  switch (status) {
    case TraceStatus::Scored: return "scored";
    case TraceStatus::MissingMarkers: return "missing_markers";
    case TraceStatus::ParseError: return "parse_error";
    case TraceStatus::NoAnswer: return "no_answer";
  }
  return "scored";
}

std::string_view to_string(Mode mode) { return mode == Mode::Uml ? "uml" : "text"; }

Mode parse_mode(std::string_view name) {
  if (name == "uml") return Mode::Uml;
  if (name == "text") return Mode::Text;
  throw Error(ErrorCode::InvalidConfig, "unknown mode '" + std::string(name) + "'");
}

std::optional<CanonicalPartition> canonical_partition(std::string_view name) {
  std::string s = uml::normalize_label(name);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  static const std::regex enumerator(R"(^\(?(?:[0-9]+|[ivx]+)[.):]\s*)");
  s = std::regex_replace(s, enumerator, "", std::regex_constants::format_first_only);
  while (!s.empty() && std::ispunct(static_cast<unsigned char>(s.back()))) s.pop_back();

  auto starts = [&](std::string_view prefix) { return std::string_view(s).substr(0, prefix.size()) == prefix; };
  if (starts("main messy areas")) return CanonicalPartition::MessyAreas;
  // The annotation prompt spelled this title "Cleaning Priority Orde".
  if (starts("cleaning priority orde")) return CanonicalPartition::PriorityOrder;
  if (starts("specific cleaning steps")) return CanonicalPartition::CleaningSteps;
  return std::nullopt;
}

SimilarityMatrix::SimilarityMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw std::invalid_argument("ragged similarity matrix");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

PartitionMatch greedy_match(const SimilarityMatrix& sim) {
  const auto rows = sim.rows();
  const auto cols = sim.cols();
  std::vector<std::size_t> cells(rows * cols);
  std::iota(cells.begin(), cells.end(), std::size_t{0});
  // Row-major cell index order already encodes (row, col) ascending.
  std::stable_sort(cells.begin(), cells.end(), [&](std::size_t a, std::size_t b) {
    return sim(a / cols, a % cols) > sim(b / cols, b % cols);
  });

  PartitionMatch out;
  std::vector<bool> gt_used(rows, false);
  std::vector<bool> pred_used(cols, false);
  for (auto cell : cells) {
    const auto i = cell / cols;
    const auto j = cell % cols;
    if (gt_used[i] || pred_used[j]) continue;
    gt_used[i] = pred_used[j] = true;
    out.pairs.push_back({i, j, sim(i, j)});
  }
  for (std::size_t i = 0; i < rows; ++i) {
    if (!gt_used[i]) out.unmatched_gt.push_back(i);
  }
  for (std::size_t j = 0; j < cols; ++j) {
    if (!pred_used[j]) out.unmatched_pred.push_back(j);
  }
  return out;
}

namespace {

struct SectionNodes {
  bool present = false;
  std::vector<std::string> labels;
};

using Sections = std::map<CanonicalPartition, SectionNodes>;

// Partitions whose titles map to the same section are concatenated in
// source order. Returns the number of nodes outside every section.
std::size_t collect_sections(const uml::ActivityDiagram& d, Sections& sections) {
  std::size_t extra = d.orphan_nodes.size();
  for (const auto& p : d.partitions) {
    auto id = canonical_partition(p.name);
    if (!id) {
      extra += p.nodes.size();
      continue;
    }
    auto& s = sections[*id];
    s.present = true;
    for (const auto& n : p.nodes) s.labels.push_back(n.label);
  }
  return extra;
}

MatchTrace unscored_trace(const Sections& ref, TraceStatus status) {
  MatchTrace trace;
  trace.status = status;
  for (auto id : kCanonicalPartitions) {
    PartitionMatch m;
    m.partition_missing_in_pred = true;
    auto it = ref.find(id);
    if (it != ref.end()) {
      m.gt_labels = it->second.labels;
      for (std::size_t i = 0; i < m.gt_labels.size(); ++i) m.unmatched_gt.push_back(i);
    }
    trace.total_gt_nodes += m.gt_labels.size();
    trace.per_partition[id] = std::move(m);
  }
  return trace;
}

double mean_contribution(const MatchTrace& trace) {
  if (trace.total_gt_nodes == 0) return 0.0;
  double sum = 0.0;
  for (const auto& [id, m] : trace.per_partition) {
    for (const auto& p : m.pairs) sum += p.similarity;
  }
  return std::clamp(sum / static_cast<double>(trace.total_gt_nodes), 0.0, 1.0);
}

}  // namespace

std::size_t canonical_node_count(const uml::ActivityDiagram& diagram) {
  Sections sections;
  collect_sections(diagram, sections);
  std::size_t n = 0;
  for (const auto& [id, s] : sections) n += s.labels.size();
  return n;
}

UmlAccuracy accuracy_reward_uml(const uml::ActivityDiagram& reference,
                                std::string_view pred_answer, const embed::Embedder& embedder) {
  Sections ref;
  collect_sections(reference, ref);
  if (canonical_node_count(reference) == 0) {
    throw Error(ErrorCode::InvalidReference, "reference has no node in any canonical partition");
  }
  if (!uml::check_markers(pred_answer)) {
    return {0.0, unscored_trace(ref, TraceStatus::MissingMarkers)};
  }
  uml::ActivityDiagram predicted;
  try {
    predicted = uml::parse_activity(pred_answer);
  } catch (const Error& e) {
    auto trace = unscored_trace(ref, TraceStatus::ParseError);
    trace.error = std::string(to_string(e.code())) + ": " + e.what();
    return {0.0, std::move(trace)};
  }

  Sections pred;
  MatchTrace trace;
  trace.extra_pred_nodes = collect_sections(predicted, pred);
  trace.total_pred_nodes = predicted.node_count();

  for (auto id : kCanonicalPartitions) {
    PartitionMatch m;
    const auto& gt = ref[id].labels;
    const auto& pd = pred[id];
    m.gt_labels = gt;
    m.pred_labels = pd.labels;
    m.partition_missing_in_pred = !pd.present;
    trace.total_gt_nodes += gt.size();

    if (!gt.empty() && !pd.labels.empty()) {
      std::vector<std::string> texts = gt;
      texts.insert(texts.end(), pd.labels.begin(), pd.labels.end());
      const auto vectors = embedder.embed(texts);
      SimilarityMatrix sim(gt.size(), pd.labels.size());
      for (std::size_t i = 0; i < gt.size(); ++i) {
        for (std::size_t j = 0; j < pd.labels.size(); ++j) {
          // Negative cosines contribute nothing.
          sim(i, j) = std::max(0.0, embed::cosine(vectors[i], vectors[gt.size() + j]));
        }
      }
      auto matched = greedy_match(sim);
      m.pairs = std::move(matched.pairs);
      m.unmatched_gt = std::move(matched.unmatched_gt);
      m.unmatched_pred = std::move(matched.unmatched_pred);
    } else {
      for (std::size_t i = 0; i < gt.size(); ++i) m.unmatched_gt.push_back(i);
      for (std::size_t j = 0; j < pd.labels.size(); ++j) m.unmatched_pred.push_back(j);
    }
    trace.per_partition[id] = std::move(m);
  }
  const double reward = mean_contribution(trace);
  return {reward, std::move(trace)};
}

double accuracy_reward_text(std::string_view ref_plan, std::string_view pred_answer,
                            const embed::Embedder& embedder) {
  if (ref_plan.empty()) throw Error(ErrorCode::InvalidReference, "reference plan is empty");
  const std::vector<std::string> texts{std::string(ref_plan), std::string(pred_answer)};
  const auto v = embedder.embed(texts);
  return std::clamp(embed::cosine(v[0], v[1]), 0.0, 1.0);
}

Reference Reference::uml(std::string source) {
  Reference r;
  r.mode_ = Mode::Uml;
  try {
    r.diagram_ = uml::parse_activity(source);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidReference,
                "reference diagram does not parse: " + std::string(to_string(e.code())) + ": " +
                    e.what(),
                e.line());
  }
  if (canonical_node_count(*r.diagram_) == 0) {
    throw Error(ErrorCode::InvalidReference, "reference has no node in any canonical partition");
  }
  r.content_ = std::move(source);
  return r;
}

Reference Reference::text(std::string plan) {
  if (plan.empty()) throw Error(ErrorCode::InvalidReference, "reference plan is empty");
  Reference r;
  r.mode_ = Mode::Text;
  r.content_ = std::move(plan);
  return r;
}

RewardBreakdown total_reward(std::string_view raw_output, const Reference& reference,
                             const embed::Embedder& embedder) {
  const auto tagged = tagged::extract(raw_output);
  RewardBreakdown out;
  out.mode = reference.mode();
  out.format_reward = tagged.format_valid ? 1.0 : 0.0;
  out.answer_present = tagged.answer.has_value();

  if (reference.mode() == Mode::Uml) {
    if (tagged.answer) {
      auto scored = accuracy_reward_uml(reference.diagram(), *tagged.answer, embedder);
      out.accuracy_reward = scored.reward;
      out.trace = std::move(scored.trace);
    } else {
      Sections ref;
      collect_sections(reference.diagram(), ref);
      out.trace = unscored_trace(ref, TraceStatus::NoAnswer);
    }
  } else if (tagged.answer) {
    out.accuracy_reward = accuracy_reward_text(reference.content(), *tagged.answer, embedder);
  }
  out.total = out.format_reward + out.accuracy_reward;
  return out;
}

RewardBreakdown total_reward(std::string_view raw_output, const Reference& reference,
                             const embed::EmbedderConfig& config) {
  return total_reward(raw_output, reference, *embed::make_embedder(config));
}

}  // namespace umlcot::reward
