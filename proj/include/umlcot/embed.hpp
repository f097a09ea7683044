#pragma once

// Text embeddings for node matching. The builtin backend is a hashed
// bag-of-words (hermetic and bit-reproducible); the service backend talks to
// an external sentence-embedding server over JSON/HTTP.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace umlcot::embed {

struct EmbeddingVector {
  std::vector<double> values;
  // True iff the L2 norm is 1 within 1e-6.
  bool norm_flag = false;

  static EmbeddingVector from_values(std::vector<double> values);

  std::size_t dimension() const { return values.size(); }
  bool is_zero() const;
  double norm() const;
};

/// L2-normalizes with one division per component; the zero vector stays zero.
EmbeddingVector normalized(std::vector<double> values);

enum class Backend { Builtin, Service };

std::string_view to_string(Backend backend);
Backend parse_backend(std::string_view name);

struct EmbedderConfig {
  Backend backend = Backend::Builtin;
  std::size_t dimension = 256;
  std::optional<std::string> endpoint;
  int timeout_ms = 5000;
  std::size_t batch_size = 64;

  // Throws umlcot::Error(InvalidConfig) when the fields are inconsistent.
  void validate() const;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  /// One vector per text, in input order.
  virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const = 0;
};

class BuiltinEmbedder final : public Embedder {
 public:
  explicit BuiltinEmbedder(std::size_t dimension = 256);

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override;
  EmbeddingVector embed_one(std::string_view text) const;
  /// Token counts per bucket before normalization.
  std::vector<double> counts(std::string_view text) const;
  std::size_t dimension() const { return dimension_; }

 private:
  std::size_t dimension_;
};

/// Client for `POST <endpoint>/embed`. Each request uses its own connection,
/// so one instance may serve concurrent callers.
class ServiceEmbedder final : public Embedder {
 public:
  ServiceEmbedder(std::string endpoint, int timeout_ms = 5000, std::size_t batch_size = 64);

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override;

 private:
  std::string origin_;  // scheme://host[:port]
  std::string path_;    // base path + "/embed"
  int timeout_ms_;
  std::size_t batch_size_;
};

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config);

/// Throws std::invalid_argument on an empty list; service failures surface as
/// umlcot::Error (ServiceUnreachable, ServiceMalformedResponse,
/// DimensionMismatch).
std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts,
                                         const EmbedderConfig& config);

/// dot(a, b) / (|a| |b|), or 0.0 when either side is the zero vector.
/// Throws umlcot::Error(DimensionMismatch) on unequal lengths.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

std::uint64_t fnv1a64(std::string_view bytes);

/// Lowercased maximal runs of ASCII alphanumerics (bytes >= 0x80 count as
/// token characters so UTF-8 words stay whole).
std::vector<std::string> tokenize(std::string_view text);

}  // namespace umlcot::embed
