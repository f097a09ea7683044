#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "json.hpp"
#include "umlcot/corpus.hpp"
#include "umlcot/error.hpp"

namespace umlcot::corpus {

namespace {

using nlohmann::json;

[[noreturn]] void malformed(std::size_t line, const std::string& reason) {
  throw Error(ErrorCode::MalformedLine, "line " + std::to_string(line) + ": " + reason, line);
}

const json& require(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) malformed(line, std::string("missing \"") + key + "\"");
  return *it;
}

std::string require_string(const json& obj, const char* key, std::size_t line) {
  const auto& v = require(obj, key, line);
  if (!v.is_string()) malformed(line, std::string("\"") + key + "\" must be a string");
  return v.get<std::string>();
}

CorpusInstance parse_instance(const std::string& text, std::size_t line) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    malformed(line, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) malformed(line, "instance must be a JSON object");

  CorpusInstance inst;
  inst.id = require_string(j, "id", line);
  if (inst.id.empty()) malformed(line, "\"id\" is empty");

  const auto& ref = require(j, "reference", line);
  if (!ref.is_object()) malformed(line, "\"reference\" must be an object");
  const auto format = require_string(ref, "format", line);
  if (format == "uml") {
    inst.reference.format = reward::Mode::Uml;
  } else if (format == "text") {
    inst.reference.format = reward::Mode::Text;
  } else {
    malformed(line, "reference format must be \"uml\" or \"text\", got \"" + format + "\"");
  }
  inst.reference.content = require_string(ref, "content", line);
  if (inst.reference.content.empty()) malformed(line, "reference content is empty");

  inst.prediction = require_string(j, "prediction", line);

  if (auto it = j.find("meta"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) malformed(line, "\"meta\" must be an object");
    for (const auto& [k, v] : it->items()) {
      inst.meta[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
  }

  try {
    make_reference(inst);
  } catch (const Error& e) {
    malformed(line, e.what());
  }
  return inst;
}

}  // namespace

void RunConfig::validate() const {
  embedder.validate();
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "threshold must lie in [0, 1]");
  }
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidConfig, "epsilon must be positive");
  if (group_size < 2) throw Error(ErrorCode::InvalidConfig, "group size must be at least 2");
}

std::vector<CorpusInstance> parse_corpus(std::istream& in) {
  std::vector<CorpusInstance> out;
  std::set<std::string> ids;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    auto inst = parse_instance(text, line);
    if (!ids.insert(inst.id).second) {
      throw Error(ErrorCode::DuplicateId,
                  "line " + std::to_string(line) + ": duplicate id \"" + inst.id + "\"", line);
    }
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<CorpusInstance> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open corpus " + path.string());
  return parse_corpus(in);
}

reward::Reference make_reference(const CorpusInstance& instance,
                                 std::optional<reward::Mode> mode_override) {
  const auto mode = mode_override.value_or(instance.reference.format);
  return mode == reward::Mode::Uml ? reward::Reference::uml(instance.reference.content)
                                   : reward::Reference::text(instance.reference.content);
}

metrics::CorpusReport evaluate(const std::vector<CorpusInstance>& corpus, const RunConfig& config,
                               const embed::Embedder& embedder, std::size_t jobs) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "corpus has no instances");
  // References are validated up front so that only predictions can be bad.
  std::vector<reward::Reference> references;
  references.reserve(corpus.size());
  for (const auto& inst : corpus) {
    try {
      references.push_back(make_reference(inst, config.mode_override));
    } catch (const Error& e) {
      throw Error(e.code(), "instance \"" + inst.id + "\": " + e.what());
    }
  }

  std::vector<metrics::InstanceRecord> records(corpus.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < corpus.size(); i = next++) {
      try {
        auto& rec = records[i];
        rec.id = corpus[i].id;
        rec.meta = corpus[i].meta;
        rec.reward = reward::total_reward(corpus[i].prediction, references[i], embedder);
        rec.metrics = metrics::instance_metrics(rec.reward, config.threshold);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  jobs = std::clamp<std::size_t>(jobs, 1, corpus.size());
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(jobs);
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return metrics::build_report(std::move(records));
}

}  // namespace umlcot::corpus
