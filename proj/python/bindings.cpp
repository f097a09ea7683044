// Python module `umlcot`. Structured results come back as plain dicts and
// lists (the same shape as the CLI's JSON); library failures raise
// umlcot.Error with args (code, message, line).

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "umlcot/corpus.hpp"
#include "umlcot/error.hpp"
#include "umlcot/grpo.hpp"
#include "umlcot/metrics.hpp"
#include "umlcot/reward.hpp"
#include "umlcot/serialize.hpp"
#include "umlcot/tagged.hpp"
#include "umlcot/uml.hpp"

namespace py = pybind11;
using namespace umlcot;

namespace {

py::object to_python(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

embed::EmbedderConfig embedder_config(std::size_t dimension, std::optional<std::string> endpoint) {
  embed::EmbedderConfig c;
  c.dimension = dimension;
  if (endpoint) {
    c.backend = embed::Backend::Service;
    c.endpoint = std::move(endpoint);
  }
  c.validate();
  return c;
}

}  // namespace

PYBIND11_MODULE(umlcot, m) {
  m.doc() = "PlantUML plan parsing, plan rewards, GRPO advantages and evaluation metrics";

  static py::exception<Error> error_type(m, "Error", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object line = e.line() ? py::object(py::int_(*e.line())) : py::object(py::none());
      PyErr_SetObject(error_type.ptr(),
                      py::make_tuple(std::string(to_string(e.code())), e.what(), line).ptr());
    }
  });

  m.def("check_markers", [](const std::string& s) { return uml::check_markers(s); }, py::arg("source"));

  m.def(
      "parse_activity",
      [](const std::string& source) {
        std::vector<uml::ParseWarning> warnings;
        auto d = uml::parse_activity(source, &warnings);
        return to_python({{"diagram", to_json(d)}, {"warnings", to_json(warnings)}});
      },
      py::arg("source"));

  m.def(
      "parse_class",
      [](const std::string& source) {
        std::vector<uml::ParseWarning> warnings;
        auto d = uml::parse_class(source, &warnings);
        return to_python({{"diagram", to_json(d)}, {"warnings", to_json(warnings)}});
      },
      py::arg("source"));

  m.def(
      "canonical_activity",
      [](const std::string& source) { return uml::render_activity(uml::parse_activity(source)); },
      py::arg("source"), "Re-render an activity diagram in canonical form.");

  m.def(
      "canonical_class",
      [](const std::string& source) { return uml::render_class(uml::parse_class(source)); },
      py::arg("source"), "Re-render a class diagram in canonical form.");

  m.def("extract", [](const std::string& raw) { return to_python(to_json(tagged::extract(raw))); },
        py::arg("raw"));
  m.def("format_reward", [](const std::string& raw) { return tagged::format_reward(raw); }, py::arg("raw"));

  m.def(
      "embed",
      [](const std::vector<std::string>& texts, std::size_t dimension, std::optional<std::string> endpoint) {
        std::vector<std::vector<double>> out;
        py::gil_scoped_release release;
        for (auto& v : embed::embed_batch(texts, embedder_config(dimension, std::move(endpoint)))) {
          out.push_back(std::move(v.values));
        }
        return out;
      },
      py::arg("texts"), py::arg("dimension") = 256, py::arg("endpoint") = py::none());

  m.def(
      "cosine",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        return embed::cosine(embed::EmbeddingVector::from_values(a), embed::EmbeddingVector::from_values(b));
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "greedy_match",
      [](const std::vector<std::vector<double>>& rows) {
        const std::size_t cols = rows.empty() ? 0 : rows.front().size();
        reward::SimilarityMatrix sim(rows.size(), cols);
        for (std::size_t i = 0; i < rows.size(); ++i) {
          if (rows[i].size() != cols) throw std::invalid_argument("similarity rows differ in length");
          for (std::size_t j = 0; j < cols; ++j) sim(i, j) = rows[i][j];
        }
        return to_python(to_json(reward::greedy_match(sim)));
      },
      py::arg("similarity"));

  m.def(
      "total_reward",
      [](const std::string& output, const std::string& reference, const std::string& mode, double threshold,
         std::size_t dimension, std::optional<std::string> endpoint) {
        const auto ref = reward::parse_mode(mode) == reward::Mode::Uml ? reward::Reference::uml(reference)
                                                                       : reward::Reference::text(reference);
        const auto b = reward::total_reward(output, ref, embedder_config(dimension, std::move(endpoint)));
        Json j = to_json(b);
        j["metrics"] = to_json(metrics::instance_metrics(b, threshold));
        return to_python(j);
      },
      py::arg("output"), py::arg("reference"), py::arg("mode") = "uml", py::arg("threshold") = 0.5,
      py::arg("dimension") = 256, py::arg("endpoint") = py::none());

  m.def(
      "normalize_advantages",
      [](const std::vector<double>& rewards, double epsilon, bool sample_std) {
        return grpo::normalize_advantages(rewards, epsilon,
                                          sample_std ? grpo::StdKind::Sample : grpo::StdKind::Population);
      },
      py::arg("rewards"), py::arg("epsilon") = grpo::kDefaultEpsilon, py::arg("sample_std") = false);

  m.def("select_candidate", [](const std::vector<double>& a) { return grpo::select_candidate(a); },
        py::arg("advantages"));
  m.def("policy_loss", &grpo::policy_loss, py::arg("logprob"), py::arg("advantage"));

  m.def(
      "simulate",
      [](const std::vector<std::string>& templates, const std::string& reference, std::size_t iterations,
         std::size_t group_size, double lr, std::uint64_t seed) {
        const auto ref = reward::Reference::uml(reference);
        const embed::BuiltinEmbedder embedder;
        grpo::RewardFn fn = [&](const std::string& t) { return reward::total_reward(t, ref, embedder).total; };
        const auto sim = grpo::run_simulation(grpo::ToyPolicy(templates, lr, seed), iterations, group_size, fn);
        Json curve = Json::array();
        for (const auto& r : sim.curve) curve.push_back(to_json(r));
        return to_python({{"curve", curve}, {"final_probabilities", sim.final_policy.probabilities()}});
      },
      py::arg("templates"), py::arg("reference"), py::arg("iterations") = 200,
      py::arg("group_size") = grpo::kDefaultGroupSize, py::arg("lr") = 0.1, py::arg("seed") = 0);

  m.def(
      "evaluate_corpus",
      [](const std::string& path, double threshold, std::size_t jobs, bool traces, std::size_t dimension,
         std::optional<std::string> endpoint) {
        corpus::RunConfig cfg;
        cfg.embedder = embedder_config(dimension, std::move(endpoint));
        cfg.threshold = threshold;
        cfg.validate();
        Json j;
        {
          py::gil_scoped_release release;
          const auto instances = corpus::load_corpus(path);
          const auto embedder = embed::make_embedder(cfg.embedder);
          j = to_json(corpus::evaluate(instances, cfg, *embedder, jobs), traces);
        }
        return to_python(j);
      },
      py::arg("path"), py::arg("threshold") = 0.5, py::arg("jobs") = 1, py::arg("traces") = false,
      py::arg("dimension") = 256, py::arg("endpoint") = py::none());
}
