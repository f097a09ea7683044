#include "umlcot/serialize.hpp"

namespace umlcot {

namespace {

Json nodes_json(const std::vector<uml::ActivityNode>& nodes) {
  Json out = Json::array();
  for (const auto& n : nodes) out.push_back(n.label);
  return out;
}

Json controls_json(const std::vector<uml::ControlConstruct>& controls) {
  Json out = Json::array();
  for (const auto& c : controls) {
    Json j = {{"kind", std::string(uml::to_string(c.kind))}, {"position", c.position}};
    j["condition"] = c.condition ? Json(*c.condition) : Json(nullptr);
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace

Json to_json(const uml::ActivityDiagram& d) {
  Json partitions = Json::array();
  for (const auto& p : d.partitions) {
    partitions.push_back(
        {{"name", p.name}, {"nodes", nodes_json(p.nodes)}, {"controls", controls_json(p.controls)}});
  }
  return {{"kind", "activity"},
          {"has_start", d.has_start},
          {"has_stop", d.has_stop},
          {"partitions", std::move(partitions)},
          {"orphan_nodes", nodes_json(d.orphan_nodes)},
          {"orphan_controls", controls_json(d.orphan_controls)}};
}

Json to_json(const uml::ClassDiagram& d) {
  Json classes = Json::array();
  for (const auto& c : d.classes) {
    classes.push_back({{"name", c.name}, {"members", c.members}, {"implicit", c.implicit}});
  }
  Json relations = Json::array();
  for (const auto& r : d.relations) {
    Json j = {{"source", r.source},
              {"target", r.target},
              {"kind", std::string(uml::to_string(r.kind))},
              {"arrow", std::string(uml::arrow(r.kind))}};
    j["label"] = r.label ? Json(*r.label) : Json(nullptr);
    relations.push_back(std::move(j));
  }
  return {{"kind", "class"}, {"classes", std::move(classes)}, {"relations", std::move(relations)}};
}

Json to_json(const std::vector<uml::ParseWarning>& warnings) {
  Json out = Json::array();
  for (const auto& w : warnings) out.push_back({{"line", w.line}, {"message", w.message}});
  return out;
}

Json to_json(const tagged::TaggedOutput& t) {
  return {{"think", t.think ? Json(*t.think) : Json(nullptr)},
          {"answer", t.answer ? Json(*t.answer) : Json(nullptr)},
          {"format_valid", t.format_valid}};
}

Json to_json(const reward::PartitionMatch& m) {
  Json pairs = Json::array();
  for (const auto& p : m.pairs) {
    pairs.push_back({{"gt_index", p.gt_index}, {"pred_index", p.pred_index}, {"similarity", p.similarity}});
  }
  return {{"pairs", std::move(pairs)},
          {"unmatched_gt", m.unmatched_gt},
          {"unmatched_pred", m.unmatched_pred},
          {"partition_missing_in_pred", m.partition_missing_in_pred},
          {"gt_labels", m.gt_labels},
          {"pred_labels", m.pred_labels}};
}

Json to_json(const reward::MatchTrace& t) {
  Json parts = Json::object();
  for (const auto& [id, m] : t.per_partition) parts[std::string(reward::to_string(id))] = to_json(m);
  Json j = {{"per_partition", std::move(parts)},
            {"total_gt_nodes", t.total_gt_nodes},
            {"total_pred_nodes", t.total_pred_nodes},
            {"extra_pred_nodes", t.extra_pred_nodes},
            {"status", std::string(reward::to_string(t.status))}};
  j["error"] = t.error ? Json(*t.error) : Json(nullptr);
  return j;
}

Json to_json(const reward::RewardBreakdown& r, bool include_trace) {
  Json j = {{"format_reward", r.format_reward},
            {"accuracy_reward", r.accuracy_reward},
            {"total", r.total},
            {"mode", std::string(reward::to_string(r.mode))}};
  if (include_trace) j["trace"] = r.trace ? to_json(*r.trace) : Json(nullptr);
  return j;
}

Json to_json(const metrics::InstanceMetrics& m) {
  return {{"similarity", m.similarity}, {"precision", m.precision}, {"recall", m.recall},
          {"f1", m.f1},                 {"success_rate", m.success_rate},
          {"tp", m.tp},                 {"fp", m.fp},
          {"fn", m.fn},                 {"matched_pairs", m.matched_pairs},
          {"threshold", m.threshold}};
}

Json to_json(const metrics::AggregateMetrics& m) {
  return {{"similarity", m.similarity}, {"precision", m.precision}, {"recall", m.recall},
          {"f1", m.f1},                 {"success_rate", m.success_rate},
          {"tp", m.tp},                 {"fp", m.fp},
          {"fn", m.fn},                 {"threshold", m.threshold}};
}

Json to_json(const metrics::MicroMetrics& m) {
  return {{"similarity", m.similarity}, {"precision", m.precision}, {"recall", m.recall},
          {"f1", m.f1},                 {"tp", m.tp},                {"fp", m.fp},
          {"fn", m.fn}};
}

Json to_json(const metrics::CorpusReport& report, bool include_traces) {
  Json instances = Json::array();
  for (const auto& r : report.per_instance) {
    instances.push_back({{"id", r.id},
                         {"metrics", to_json(r.metrics)},
                         {"reward", to_json(r.reward, include_traces)},
                         {"meta", r.meta}});
  }
  return {{"count", report.count},
          {"aggregate", to_json(report.aggregate)},
          {"micro", to_json(report.micro)},
          {"rewards",
           {{"format_reward", report.rewards.format_reward},
            {"accuracy_reward", report.rewards.accuracy_reward},
            {"total", report.rewards.total}}},
          {"instances", std::move(instances)}};
}

Json to_json(const grpo::StepRecord& r) {
  return {{"iteration", r.iteration},
          {"samples", r.samples},
          {"rewards", r.rewards},
          {"advantages", r.advantages},
          {"selected", r.selected},
          {"selected_template", r.selected_template},
          {"mean_reward", r.mean_reward},
          {"max_reward", r.max_reward},
          {"expected_reward", r.expected_reward},
          {"p_best_template", r.p_best_template},
          {"loss", r.loss}};
}

Json to_json(const corpus::RunConfig& c) {
  Json j = {{"embedder", std::string(embed::to_string(c.embedder.backend))},
            {"dimension", c.embedder.dimension},
            {"threshold", c.threshold},
            {"epsilon", c.epsilon},
            {"group_size", c.group_size},
            {"seed", c.seed}};
  j["endpoint"] = c.embedder.endpoint ? Json(*c.embedder.endpoint) : Json(nullptr);
  j["mode"] = c.mode_override ? Json(std::string(reward::to_string(*c.mode_override))) : Json(nullptr);
  return j;
}

}  // namespace umlcot
