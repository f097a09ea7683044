#include <regex>
#include <string>

#include "httplib.h"
#include "json.hpp"
#include "umlcot/embed.hpp"
#include "umlcot/error.hpp"

namespace umlcot::embed {

namespace {

using nlohmann::json;

[[noreturn]] void malformed(const std::string& why) {
  throw Error(ErrorCode::ServiceMalformedResponse, "embedding service: " + why);
}

}  // namespace

ServiceEmbedder::ServiceEmbedder(std::string endpoint, int timeout_ms, std::size_t batch_size)
    : timeout_ms_(timeout_ms), batch_size_(batch_size) {
  static const std::regex url(R"(^(http://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(endpoint, m, url)) {
    throw Error(ErrorCode::InvalidConfig,
                "embedding endpoint must look like http://host[:port][/path], got '" + endpoint + "'");
  }
  origin_ = m[1].str();
  auto base = m[2].matched ? m[2].str() : std::string();
  while (!base.empty() && base.back() == '/') base.pop_back();
  path_ = base + "/embed";
  if (timeout_ms_ <= 0 || batch_size_ == 0) {
    throw Error(ErrorCode::InvalidConfig, "timeout and batch size must be positive");
  }
}

std::vector<EmbeddingVector> ServiceEmbedder::embed(std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  std::optional<std::size_t> dimension;

  for (std::size_t begin = 0; begin < texts.size(); begin += batch_size_) {
    const auto count = std::min(batch_size_, texts.size() - begin);
    json request = {{"texts", json::array()}};
    for (std::size_t i = 0; i < count; ++i) request["texts"].push_back(texts[begin + i]);

    httplib::Client client(origin_);
    const auto timeout = std::chrono::milliseconds(timeout_ms_);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    auto res = client.Post(path_, request.dump(), "application/json");
    if (!res) {
      throw Error(ErrorCode::ServiceUnreachable,
                  "embedding service at " + origin_ + " unreachable: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) malformed("HTTP status " + std::to_string(res->status));

    json body;
    try {
      body = json::parse(res->body);
    } catch (const json::parse_error& e) {
      malformed(std::string("invalid JSON (") + e.what() + ")");
    }
    if (!body.is_object() || !body.contains("embeddings") || !body["embeddings"].is_array()) {
      malformed("missing 'embeddings' array");
    }
    if (!body.contains("dimension") || !body["dimension"].is_number_unsigned()) {
      malformed("missing 'dimension'");
    }
    const auto& rows = body["embeddings"];
    if (rows.size() != count) {
      malformed("expected " + std::to_string(count) + " embeddings, got " +
                std::to_string(rows.size()));
    }
    const auto declared = body["dimension"].get<std::size_t>();
    if (dimension && *dimension != declared) {
      throw Error(ErrorCode::DimensionMismatch, "embedding dimension changed from " +
                                                    std::to_string(*dimension) + " to " +
                                                    std::to_string(declared));
    }
    dimension = declared;
    for (const auto& row : rows) {
      if (!row.is_array()) malformed("embedding is not an array");
      if (row.size() != declared) {
        throw Error(ErrorCode::DimensionMismatch, "embedding of length " +
                                                      std::to_string(row.size()) +
                                                      " but dimension " + std::to_string(declared));
      }
      std::vector<double> values;
      values.reserve(row.size());
      for (const auto& x : row) {
        if (!x.is_number()) malformed("non-numeric embedding component");
        values.push_back(x.get<double>());
      }
      out.push_back(normalized(std::move(values)));
    }
  }
  return out;
}

}  // namespace umlcot::embed
