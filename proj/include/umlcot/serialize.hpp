#pragma once

// JSON views of the library types. Objects use nlohmann::json's sorted keys,
// so dumps are byte-stable.

#include "json.hpp"
#include "umlcot/corpus.hpp"
#include "umlcot/grpo.hpp"
#include "umlcot/metrics.hpp"
#include "umlcot/reward.hpp"
#include "umlcot/tagged.hpp"
#include "umlcot/uml.hpp"

namespace umlcot {

using Json = nlohmann::json;

Json to_json(const uml::ActivityDiagram& d);
Json to_json(const uml::ClassDiagram& d);
Json to_json(const std::vector<uml::ParseWarning>& warnings);
Json to_json(const tagged::TaggedOutput& t);
Json to_json(const reward::PartitionMatch& m);
Json to_json(const reward::MatchTrace& t);
Json to_json(const reward::RewardBreakdown& r, bool include_trace = true);
Json to_json(const metrics::InstanceMetrics& m);
Json to_json(const metrics::AggregateMetrics& m);
Json to_json(const metrics::MicroMetrics& m);
Json to_json(const metrics::CorpusReport& report, bool include_traces = false);
Json to_json(const grpo::StepRecord& r);
Json to_json(const corpus::RunConfig& c);

}  // namespace umlcot
