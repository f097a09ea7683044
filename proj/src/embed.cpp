#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "umlcot/embed.hpp"
#include "umlcot/error.hpp"

namespace umlcot::embed {

namespace {

bool token_char(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

double sum_of_squares(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace

EmbeddingVector EmbeddingVector::from_values(std::vector<double> values) {
  EmbeddingVector v{std::move(values), false};
  v.norm_flag = std::abs(v.norm() - 1.0) <= 1e-6;
  return v;
}

bool EmbeddingVector::is_zero() const {
  for (double x : values) {
    if (x != 0.0) return false;
  }
  return true;
}

double EmbeddingVector::norm() const { return std::sqrt(sum_of_squares(values)); }

EmbeddingVector normalized(std::vector<double> values) {
  const double n = std::sqrt(sum_of_squares(values));
  if (n > 0.0) {
    for (double& x : values) x = x / n;
  }
  return EmbeddingVector::from_values(std::move(values));
}

std::string_view to_string(Backend backend) {
  return backend == Backend::Builtin ? "builtin" : "service";
}

Backend parse_backend(std::string_view name) {
  if (name == "builtin") return Backend::Builtin;
  if (name == "service") return Backend::Service;
  throw Error(ErrorCode::InvalidConfig, "unknown embedder backend '" + std::string(name) + "'");
}

void EmbedderConfig::validate() const {
  if (dimension == 0) throw Error(ErrorCode::InvalidConfig, "embedding dimension must be positive");
  if (timeout_ms <= 0) throw Error(ErrorCode::InvalidConfig, "timeout_ms must be positive");
  if (batch_size == 0) throw Error(ErrorCode::InvalidConfig, "batch_size must be positive");
  if (backend == Backend::Service && (!endpoint || endpoint->empty())) {
    throw Error(ErrorCode::InvalidConfig, "service embedder requires an endpoint");
  }
  if (backend == Backend::Builtin && endpoint) {
    throw Error(ErrorCode::InvalidConfig, "endpoint is only valid with the service embedder");
  }
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (token_char(c)) {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

BuiltinEmbedder::BuiltinEmbedder(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ == 0) throw Error(ErrorCode::InvalidConfig, "embedding dimension must be positive");
}

std::vector<double> BuiltinEmbedder::counts(std::string_view text) const {
  std::vector<double> buckets(dimension_, 0.0);
  for (const auto& token : tokenize(text)) buckets[fnv1a64(token) % dimension_] += 1.0;
  return buckets;
}

EmbeddingVector BuiltinEmbedder::embed_one(std::string_view text) const {
  return normalized(counts(text));
}

std::vector<EmbeddingVector> BuiltinEmbedder::embed(std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_one(t));
  return out;
}

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config) {
  config.validate();
  if (config.backend == Backend::Builtin) return std::make_unique<BuiltinEmbedder>(config.dimension);
  return std::make_unique<ServiceEmbedder>(*config.endpoint, config.timeout_ms, config.batch_size);
}

std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts,
                                         const EmbedderConfig& config) {
  if (texts.empty()) throw std::invalid_argument("embed_batch requires at least one text");
  return make_embedder(config)->embed(texts);
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dimension() != b.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "cosine of vectors with dimensions " +
                                                  std::to_string(a.dimension()) + " and " +
                                                  std::to_string(b.dimension()));
  }
  double dot = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    dot += a.values[i] * b.values[i];
    aa += a.values[i] * a.values[i];
    bb += b.values[i] * b.values[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  // sqrt(aa * aa) == aa exactly, so identical vectors score exactly 1.0.
  const double c = dot / std::sqrt(aa * bb);
  return std::clamp(c, -1.0, 1.0);
}

}  // namespace umlcot::embed
