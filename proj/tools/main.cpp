// umlcot: parse diagrams, score plans, evaluate corpora, and run the toy
// policy simulator from the command line.
//
// Exit codes: 0 success, 1 bad input, 2 internal or embedding-service failure.
// Failures are reported as one JSON object on stderr.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "umlcot/corpus.hpp"
#include "umlcot/error.hpp"
#include "umlcot/format.hpp"
#include "umlcot/grpo.hpp"
#include "umlcot/metrics.hpp"
#include "umlcot/reward.hpp"
#include "umlcot/serialize.hpp"
#include "umlcot/uml.hpp"

namespace {

using namespace umlcot;

struct Globals {
  std::string embedder = "builtin";
  std::string endpoint;
  std::size_t dimension = 256;
  int timeout_ms = 5000;
  std::size_t batch_size = 64;
  double threshold = metrics::kDefaultThreshold;
  double epsilon = grpo::kDefaultEpsilon;
  std::uint64_t seed = 0;
  std::string out;
  std::string format;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
  if (!out) throw UsageError("failed writing " + path);
}

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
  } else {
    write_file(g.out, text);
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

embed::EmbedderConfig embedder_config(const Globals& g) {
  embed::EmbedderConfig c;
  c.backend = embed::parse_backend(g.embedder);
  c.dimension = g.dimension;
  if (!g.endpoint.empty()) c.endpoint = g.endpoint;
  c.timeout_ms = g.timeout_ms;
  c.batch_size = g.batch_size;
  c.validate();
  return c;
}

std::string format_or(const Globals& g, const char* fallback) {
  return g.format.empty() ? fallback : g.format;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos) {
      throw UsageError("not a number: \"" + item + "\"");
    }
    out.push_back(v);
  }
  return out;
}

int fail(int status, const std::string& code, const std::string& message,
         std::optional<std::size_t> line = std::nullopt) {
  Json err = {{"code", code}, {"message", message}};
  if (line) err["line"] = *line;
  std::cerr << Json{{"error", err}}.dump() << "\n";
  return status;
}

bool internal(ErrorCode code) {
  switch (code) {
    case ErrorCode::ServiceUnreachable:
    case ErrorCode::ServiceMalformedResponse:
    case ErrorCode::DimensionMismatch:
      return true;
    default:
      return false;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UML chain-of-thought plan evaluation"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key = value settings file (TOML syntax)");

  Globals g;
  app.add_option("--embedder", g.embedder, "Embedding backend")
      ->check(CLI::IsMember({"builtin", "service"}));
  app.add_option("--endpoint", g.endpoint, "Embedding service base URL")->envname("EMBED_ENDPOINT");
  app.add_option("--dimension", g.dimension, "Builtin embedding dimension")->check(CLI::PositiveNumber);
  app.add_option("--timeout-ms", g.timeout_ms, "Service request timeout")->check(CLI::PositiveNumber);
  app.add_option("--batch-size", g.batch_size, "Texts per service request")->check(CLI::PositiveNumber);
  app.add_option("--threshold", g.threshold, "Similarity threshold for a true positive")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--epsilon", g.epsilon, "Advantage normalization epsilon")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--out", g.out, "Write output here instead of stdout");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "csv"}));

  auto* parse = app.add_subcommand("parse", "Parse a PlantUML diagram and print its structure");
  std::string parse_file, parse_kind = "activity";
  parse->add_option("file", parse_file)->required();
  parse->add_option("--kind", parse_kind)->check(CLI::IsMember({"activity", "class"}));

  auto* rew = app.add_subcommand("reward", "Score one model output against a reference");
  std::string ref_file, pred_file, rew_mode = "uml";
  rew->add_option("--ref", ref_file, "Reference plan file")->required();
  rew->add_option("--pred", pred_file, "Raw model output file")->required();
  rew->add_option("--mode", rew_mode)->check(CLI::IsMember({"uml", "text"}));

  auto* eval = app.add_subcommand("evaluate", "Score a JSONL corpus");
  std::string corpus_file, eval_mode;
  std::size_t jobs = 1;
  bool traces = false;
  eval->add_option("corpus", corpus_file)->required();
  eval->add_option("--mode", eval_mode, "Score every reference in this mode")
      ->check(CLI::IsMember({"uml", "text"}));
  eval->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  eval->add_flag("--traces", traces, "Include match traces in the JSON report");

  auto* adv = app.add_subcommand("advantages", "Group-normalized advantages of a reward list");
  std::string reward_list, std_kind = "population";
  adv->add_option("rewards", reward_list, "Comma-separated rewards")->required();
  adv->add_option("--std", std_kind)->check(CLI::IsMember({"population", "sample"}));

  auto* sim = app.add_subcommand("simulate", "Train the toy template policy");
  std::string templates_file, sim_ref_file, sim_mode = "uml", steps_file, reward_kind = "total";
  std::size_t iterations = 200, group_size = grpo::kDefaultGroupSize;
  double lr = 0.1;
  sim->add_option("templates", templates_file, "JSON array of candidate outputs")->required();
  sim->add_option("reference", sim_ref_file, "Reference plan file")->required();
  sim->add_option("--mode", sim_mode)->check(CLI::IsMember({"uml", "text"}));
  sim->add_option("--iterations", iterations)->check(CLI::PositiveNumber);
  sim->add_option("--group-size", group_size)->check(CLI::Range(std::size_t{2}, std::size_t{4096}));
  sim->add_option("--lr", lr)->check(CLI::NonNegativeNumber);
  sim->add_option("--reward", reward_kind, "Reward used for training")
      ->check(CLI::IsMember({"total", "accuracy"}));
  sim->add_option("--steps", steps_file, "Also write every step record as JSONL");

  for (auto* sub : {parse, rew, eval, adv, sim}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(1, "UsageError", e.what());
  }

  try {
    if (*parse) {
      const auto source = read_file(parse_file);
      std::vector<uml::ParseWarning> warnings;
      Json diagram = parse_kind == "activity" ? to_json(uml::parse_activity(source, &warnings))
                                              : to_json(uml::parse_class(source, &warnings));
      emit(g, dump({{"diagram", diagram}, {"warnings", to_json(warnings)}}));
    } else if (*rew) {
      const auto mode = reward::parse_mode(rew_mode);
      const auto ref_text = read_file(ref_file);
      const auto reference =
          mode == reward::Mode::Uml ? reward::Reference::uml(ref_text) : reward::Reference::text(ref_text);
      const auto embedder = embed::make_embedder(embedder_config(g));
      const auto breakdown = reward::total_reward(read_file(pred_file), reference, *embedder);
      Json j = to_json(breakdown);
      j["metrics"] = to_json(metrics::instance_metrics(breakdown, g.threshold));
      emit(g, dump(j));
    } else if (*eval) {
      corpus::RunConfig cfg;
      cfg.embedder = embedder_config(g);
      cfg.threshold = g.threshold;
      cfg.epsilon = g.epsilon;
      cfg.seed = g.seed;
      if (!eval_mode.empty()) cfg.mode_override = reward::parse_mode(eval_mode);
      cfg.validate();
      const auto instances = corpus::load_corpus(corpus_file);
      const auto embedder = embed::make_embedder(cfg.embedder);
      const auto report = corpus::evaluate(instances, cfg, *embedder, jobs);
      Json j = to_json(report, traces);
      j["config"] = to_json(cfg);
      const auto json_text = dump(j);
      const auto csv_text = metrics::report_csv(report);
      const auto fmt = format_or(g, "json");
      if (g.out.empty()) {
        std::cout << (fmt == "json" ? json_text : csv_text);
      } else {
        // Both reports are always written; --out names the primary one.
        std::filesystem::path primary(g.out), secondary(g.out);
        secondary.replace_extension(fmt == "json" ? ".csv" : ".json");
        write_file(primary.string(), fmt == "json" ? json_text : csv_text);
        write_file(secondary.string(), fmt == "json" ? csv_text : json_text);
      }
    } else if (*adv) {
      const auto rewards = parse_list(reward_list);
      const auto kind = std_kind == "sample" ? grpo::StdKind::Sample : grpo::StdKind::Population;
      const auto a = grpo::normalize_advantages(rewards, g.epsilon, kind);
      emit(g, dump({{"rewards", rewards},
                    {"advantages", a},
                    {"selected", grpo::select_candidate(a)},
                    {"epsilon", g.epsilon},
                    {"std", std_kind}}));
    } else if (*sim) {
      Json templates_json;
      try {
        templates_json = Json::parse(read_file(templates_file));
      } catch (const Json::parse_error& e) {
        throw UsageError(templates_file + ": " + e.what());
      }
      if (!templates_json.is_array() || templates_json.empty()) {
        throw UsageError(templates_file + ": expected a non-empty JSON array of strings");
      }
      std::vector<std::string> templates;
      for (const auto& t : templates_json) {
        if (!t.is_string()) throw UsageError(templates_file + ": every template must be a string");
        templates.push_back(t.get<std::string>());
      }
      const auto ref_text = read_file(sim_ref_file);
      const auto reference = reward::parse_mode(sim_mode) == reward::Mode::Uml
                                 ? reward::Reference::uml(ref_text)
                                 : reward::Reference::text(ref_text);
      const auto embedder = embed::make_embedder(embedder_config(g));
      const bool accuracy_only = reward_kind == "accuracy";
      grpo::RewardFn reward_fn = [&](const std::string& text) {
        const auto b = reward::total_reward(text, reference, *embedder);
        return accuracy_only ? b.accuracy_reward : b.total;
      };
      grpo::StepOptions options;
      options.epsilon = g.epsilon;
      const auto result = grpo::run_simulation(grpo::ToyPolicy(templates, lr, g.seed), iterations,
                                               group_size, reward_fn, options);
      if (!steps_file.empty()) {
        std::string lines;
        for (const auto& r : result.curve) lines += to_json(r).dump() + "\n";
        write_file(steps_file, lines);
      }
      if (format_or(g, "csv") == "csv") {
        emit(g, grpo::curve_csv(result.curve));
      } else {
        Json curve = Json::array();
        for (const auto& r : result.curve) curve.push_back(to_json(r));
        emit(g, dump({{"curve", curve},
                      {"final_probabilities", result.final_policy.probabilities()},
                      {"final_theta", result.final_policy.theta}}));
      }
    }
  } catch (const Error& e) {
    return fail(internal(e.code()) ? 2 : 1, std::string(to_string(e.code())), e.what(), e.line());
  } catch (const UsageError& e) {
    return fail(1, "UsageError", e.what());
  } catch (const std::invalid_argument& e) {
    return fail(1, "InvalidArgument", e.what());
  } catch (const std::exception& e) {
    return fail(2, "InternalError", e.what());
  }
  return 0;
}
