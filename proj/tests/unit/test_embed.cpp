#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "../support/mock_embed_server.hpp"
#include "umlcot/embed.hpp"
#include "umlcot/error.hpp"

using namespace umlcot;
using namespace umlcot::embed;

namespace {

// Test-side FNV-1a, written from the published constants.
std::uint64_t oracle_fnv(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::set<std::size_t> oracle_buckets(const std::vector<std::string>& tokens, std::size_t dim) {
  std::set<std::size_t> out;
  for (const auto& t : tokens) out.insert(oracle_fnv(t) % dim);
  return out;
}

ErrorCode error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected umlcot::Error");
  return ErrorCode::InvalidConfig;
}

}  // namespace

TEST_CASE("fnv1a64 matches reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  CHECK(fnv1a64("clean") == oracle_fnv("clean"));
}

TEST_CASE("tokenize lowercases and splits on non-alphanumerics") {
  CHECK(tokenize("Clean the DESK, then-mop!") ==
        std::vector<std::string>{"clean", "the", "desk", "then", "mop"});
  CHECK(tokenize("  ;; ").empty());
  CHECK(tokenize("caf\xc3\xa9 table") == std::vector<std::string>{"caf\xc3\xa9", "table"});
}

TEST_CASE("builtin: deterministic and unit norm") {
  const std::vector<std::string> texts{"clean the desk", "clean the desk"};
  auto v = embed_batch(texts, EmbedderConfig{});
  REQUIRE(v.size() == 2);
  CHECK(v[0].values == v[1].values);
  CHECK(v[0].dimension() == 256);
  CHECK(v[0].norm_flag);
  CHECK(std::abs(v[0].norm() - 1.0) <= 1e-6);
}

TEST_CASE("builtin: empty text is the zero vector") {
  const std::vector<std::string> texts{""};
  auto v = embed_batch(texts, EmbedderConfig{});
  REQUIRE(v.size() == 1);
  CHECK(v[0].dimension() == 256);
  CHECK(v[0].is_zero());
  CHECK_FALSE(v[0].norm_flag);
}

TEST_CASE("builtin: repeated token gives the same direction") {
  // "floor" -> count 1 in one bucket, "floor floor" -> count 2 in the same
  // bucket; both normalize to the same basis vector.
  const auto bucket = oracle_fnv("floor") % 256;
  BuiltinEmbedder e;
  auto once = e.embed_one("floor");
  auto twice = e.embed_one("floor floor");
  CHECK(e.counts("floor floor")[bucket] == 2.0);
  CHECK(once.values == twice.values);
  CHECK(once.values[bucket] == 1.0);
}

TEST_CASE("builtin: disjoint plans have zero cosine") {
  const auto a = oracle_buckets({"wipe", "the", "table"}, 256);
  const auto b = oracle_buckets({"wash", "windows"}, 256);
  for (auto x : a) CHECK(b.count(x) == 0);
  BuiltinEmbedder e;
  CHECK(cosine(e.embed_one("wipe the table"), e.embed_one("wash windows")) == 0.0);
}

TEST_CASE("embed_batch rejects an empty list") {
  CHECK_THROWS_AS(embed_batch({}, EmbedderConfig{}), std::invalid_argument);
}

TEST_CASE("cosine") {
  BuiltinEmbedder e;
  auto v = e.embed_one("scrub the bathtub");
  CHECK(cosine(v, v) == 1.0);

  auto e1 = EmbeddingVector::from_values({1, 0, 0});
  auto e2 = EmbeddingVector::from_values({0, 1, 0});
  CHECK(cosine(e1, e2) == 0.0);

  auto zero = EmbeddingVector::from_values({0, 0, 0});
  CHECK(cosine(zero, e1) == 0.0);
  CHECK(cosine(e1, zero) == 0.0);

  auto short_vec = EmbeddingVector::from_values({1, 0});
  CHECK(error_of([&] { cosine(e1, short_vec); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("property: cosine symmetry and scale invariance on count vectors") {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> count(0, 4);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> a(32), b(32);
    for (auto& x : a) x = count(rng);
    for (auto& x : b) x = count(rng);
    const auto va = EmbeddingVector::from_values(a);
    const auto vb = EmbeddingVector::from_values(b);
    CHECK(cosine(va, vb) == cosine(vb, va));
    const double k = scale(rng);
    std::vector<double> ka = a;
    for (auto& x : ka) x *= k;
    CHECK(std::abs(cosine(EmbeddingVector::from_values(ka), vb) - cosine(va, vb)) <= 1e-12);
    const double c = cosine(va, vb);
    CHECK((c >= -1.0 && c <= 1.0));
  }
}

TEST_CASE("config validation") {
  EmbedderConfig service;
  service.backend = Backend::Service;
  CHECK(error_of([&] { service.validate(); }) == ErrorCode::InvalidConfig);
  service.endpoint = "http://127.0.0.1:1";
  CHECK_NOTHROW(service.validate());

  EmbedderConfig builtin;
  builtin.endpoint = "http://127.0.0.1:1";
  CHECK(error_of([&] { builtin.validate(); }) == ErrorCode::InvalidConfig);

  CHECK(error_of([] { ServiceEmbedder("ftp://nowhere"); }) == ErrorCode::InvalidConfig);
  CHECK(parse_backend("service") == Backend::Service);
  CHECK(error_of([] { parse_backend("minilm"); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("service: batches, preserves order and post-normalizes") {
  testing::MockEmbedServer server(64);
  EmbedderConfig cfg;
  cfg.backend = Backend::Service;
  cfg.endpoint = server.endpoint();
  cfg.batch_size = 16;

  std::vector<std::string> texts;
  for (int i = 0; i < 40; ++i) texts.push_back("item " + std::to_string(i) + " on the shelf");
  texts.push_back("");
  auto vectors = embed_batch(texts, cfg);
  REQUIRE(vectors.size() == texts.size());
  CHECK(server.requests() == 3);

  BuiltinEmbedder local(64);
  for (std::size_t i = 0; i + 1 < texts.size(); ++i) {
    CHECK(vectors[i].norm_flag);
    const auto expected = local.embed_one(texts[i]);
    for (std::size_t d = 0; d < 64; ++d) CHECK(vectors[i].values[d] == doctest::Approx(expected.values[d]).epsilon(1e-12));
  }
  CHECK(vectors.back().is_zero());
}

TEST_CASE("service: base path is kept in front of /embed") {
  CHECK_NOTHROW(ServiceEmbedder("http://localhost:8080/v1/"));
}

TEST_CASE("service: malformed responses") {
  testing::MockEmbedServer server(64);
  ServiceEmbedder client(server.endpoint(), 2000, 8);
  const std::vector<std::string> texts{"a b", "c d", "e"};

  server.set_behavior(testing::MockEmbedServer::Behavior::Truncated);
  CHECK(error_of([&] { client.embed(texts); }) == ErrorCode::ServiceMalformedResponse);
  server.set_behavior(testing::MockEmbedServer::Behavior::ServerError);
  CHECK(error_of([&] { client.embed(texts); }) == ErrorCode::ServiceMalformedResponse);
  server.set_behavior(testing::MockEmbedServer::Behavior::WrongCount);
  CHECK(error_of([&] { client.embed(texts); }) == ErrorCode::ServiceMalformedResponse);
  server.set_behavior(testing::MockEmbedServer::Behavior::RaggedDimensions);
  CHECK(error_of([&] { client.embed(texts); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("service: unreachable endpoint") {
  std::string endpoint;
  {
    testing::MockEmbedServer server;
    endpoint = server.endpoint();
  }
  ServiceEmbedder client(endpoint, 500, 8);
  const std::vector<std::string> texts{"x"};
  CHECK(error_of([&] { client.embed(texts); }) == ErrorCode::ServiceUnreachable);
}

TEST_CASE("service: concurrent callers share one client") {
  testing::MockEmbedServer server(64);
  ServiceEmbedder client(server.endpoint(), 5000, 4);
  BuiltinEmbedder local(64);
  std::vector<std::jthread> workers;
  std::atomic<int> mismatches{0};
  for (int w = 0; w < 4; ++w) {
    workers.emplace_back([&, w] {
      std::vector<std::string> texts;
      for (int i = 0; i < 10; ++i) texts.push_back("worker " + std::to_string(w) + " text " + std::to_string(i));
      auto v = client.embed(texts);
      for (std::size_t i = 0; i < texts.size(); ++i) {
        if (std::abs(cosine(v[i], local.embed_one(texts[i])) - 1.0) > 1e-12) ++mismatches;
      }
    });
  }
  workers.clear();
  CHECK(mismatches == 0);
}
