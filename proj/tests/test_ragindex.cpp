// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <cstring>
#include <map>

#include "corpus_support.hpp"
#include "datascout/core/clock.hpp"
#include "datascout/core/fs.hpp"
#include "datascout/core/rng.hpp"
#include "datascout/modelgw.hpp"
#include "datascout/ragindex.hpp"
#include "support.hpp"

using namespace datascout;
using namespace datascout::ragindex;
using testsupport::TempDir;

namespace {

std::string numbered_tokens(std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += (i ? " t" : "t") + std::to_string(i);
  return s;
}

/// Maps fixed words to fixed vectors; anything else is an error.
class TableEmbedder final : public modelgw::EmbedBackend {
 public:
  explicit TableEmbedder(std::map<std::string, std::vector<double>> table) : table_(std::move(table)) {}
  std::vector<std::vector<double>> embed(const std::vector<std::string>& inputs) override {
    std::vector<std::vector<double>> out;
    for (const auto& s : inputs) out.push_back(table_.at(s));
    return out;
  }
  std::string identity() const override { return "table-embedder"; }

 private:
  std::map<std::string, std::vector<double>> table_;
};

modelgw::Gateway table_gateway(std::map<std::string, std::vector<double>> table, std::size_t dims) {
  modelgw::GatewayConfig cfg;
  cfg.dims = dims;
  return modelgw::Gateway(cfg, std::make_shared<modelgw::StubChat>(), std::make_shared<TableEmbedder>(std::move(table)),
                          std::make_shared<modelgw::StubCaptioner>());
}

std::string random_text(Rng& rng, std::size_t max_tokens) {
  static const std::vector<std::string> pool{"ocean", "salinity", "ice", "core", "isotope", "2018", "glacier",
                                             "melt",  "sensor",   "co2", "flux", "arctic",  "model", "grid"};
  std::string s;
  for (std::uint64_t i = 0, n = rng.below(max_tokens + 1); i < n; ++i) {
    s += pool[rng.below(pool.size())] + (rng.uniform() < 0.1 ? ". " : " ");
  }
  return s;
}

IndexEntry unit_entry(const std::string& id, std::vector<double> v) {
  IndexEntry e;
  e.entry_id = id;
  e.vector = std::move(v);
  return e;
}

}  // namespace

// ---------------------------------------------------------------------------
// Chunking

TEST_CASE("Ragindex: a 600-token text gives three chunks at 0, 224 and 448", "[unit][ragindex]") {
  const auto text = numbered_tokens(600);
  const auto chunks = chunk_text(text, 256, 32);
  REQUIRE(chunks.size() == 3);
  CHECK(chunks[0].rfind("t0 ", 0) == 0);
  CHECK(chunks[1].rfind("t224 ", 0) == 0);
  CHECK(chunks[2].rfind("t448 ", 0) == 0);
  CHECK(text::count_tokens(chunks[0]) == 256);
  CHECK(text::count_tokens(chunks[1]) == 256);
  CHECK(text::count_tokens(chunks[2]) == 152);
  CHECK(text::ends_with(chunks[2], "t599"));
}

TEST_CASE("Ragindex: short and empty texts are one chunk", "[unit][ragindex]") {
  const auto text = numbered_tokens(100);
  CHECK(chunk_text(text) == std::vector<std::string>{text});
  CHECK(chunk_text("") == std::vector<std::string>{""});
  CHECK_ERROR_CODE(chunk_text("a b", 32, 32), ErrorCode::kInvalidArgument);
}

TEST_CASE("Ragindex: chunks cover every token with the configured overlap", "[property][ragindex]") {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + rng.below(900);
    const std::size_t size = 2 + rng.below(300);
    const std::size_t overlap = rng.below(size);
    const auto chunks = chunk_text(numbered_tokens(n), size, overlap);
    const std::size_t stride = size - overlap;
    const std::size_t expected = n <= size ? 1 : 1 + (n - size + stride - 1) / stride;
    CHECK(chunks.size() == expected);
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      CHECK(chunks[i].rfind("t" + std::to_string(i * stride), 0) == 0);
      CHECK(text::count_tokens(chunks[i]) <= size);
    }
    CHECK(text::ends_with(chunks.back(), "t" + std::to_string(n - 1)));
  }
}

// ---------------------------------------------------------------------------
// Cosine and pooling

TEST_CASE("Ragindex: cosine of simple vectors", "[unit][ragindex]") {
  CHECK(cosine({1, 2, 3}, {1, 2, 3}) == Catch::Approx(1.0).margin(1e-12));
  CHECK(cosine({1, 0}, {0, 1}) == 0.0);
  CHECK(cosine({1, 0}, {1 / std::sqrt(2.0), 1 / std::sqrt(2.0)}) == Catch::Approx(0.70710678).margin(1e-8));
  CHECK_ERROR_CODE(cosine({0, 0}, {1, 0}), ErrorCode::kZeroVector);
  CHECK_ERROR_CODE(cosine({1, 0}, {1, 0, 0}), ErrorCode::kDimMismatch);
}

TEST_CASE("Ragindex: a single-chunk entry equals the embedding of its text", "[unit][ragindex]") {
  const auto gw = modelgw::Gateway::stub();
  const auto e = build_entry("r", "Glacier melt rates.", "", gw);
  CHECK(e.chunk_count == 1);
  CHECK(e.vector == gw.embed("Glacier melt rates.").values);
  CHECK(e.source_text_hash == hashing::sha256_hex("Glacier melt rates."));
}

TEST_CASE("Ragindex: identical chunks pool to the single-chunk vector", "[unit][ragindex]") {
  const auto gw = table_gateway({{"aa", {0.6, 0.8, 0.0}}}, 3);
  const auto pooled = chunk_average("aa aa", gw, {1, 0});
  CHECK(pooled.chunk_count == 2);
  CHECK(pooled.vector == std::vector<double>{0.6, 0.8, 0.0});
}

TEST_CASE("Ragindex: orthogonal chunks pool to the normalized sum", "[unit][ragindex]") {
  const auto gw = table_gateway({{"uu", {1.0, 0.0, 0.0}}, {"vv", {0.0, 1.0, 0.0}}}, 3);
  const auto pooled = chunk_average("uu vv", gw, {1, 0});
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(pooled.vector[0] == Catch::Approx(r).margin(1e-12));
  CHECK(pooled.vector[1] == Catch::Approx(r).margin(1e-12));
  CHECK(cosine(pooled.vector, {1, 0, 0}) == Catch::Approx(0.7071).margin(1e-4));
  CHECK(cosine(pooled.vector, {0, 1, 0}) == Catch::Approx(0.7071).margin(1e-4));
}

TEST_CASE("Ragindex: entry text joins generated then user description", "[unit][ragindex]") {
  CHECK(entry_text("gen", "user") == "gen\n\n---\n\nuser");
  CHECK(entry_text("gen", " ") == "gen");
  CHECK(entry_text("", "user") == "user");
  CHECK_ERROR_CODE(entry_text(" ", ""), ErrorCode::kAllEmptyDescriptions);
}

TEST_CASE("Ragindex: mean pooling matches a direct recomputation", "[property][ragindex]") {
  const auto gw = modelgw::Gateway::stub();
  Rng rng(100);
  const ChunkOptions opts{16, 4};
  for (int trial = 0; trial < 100; ++trial) {
    const auto text = random_text(rng, 80);
    const auto pooled = chunk_average(text, gw, opts);
    const auto chunks = chunk_text(text, opts.chunk_tokens, opts.overlap_tokens);
    std::vector<double> mean(gw.dims(), 0.0);
    for (const auto& c : chunks) {
      const auto v = gw.embed(c).values;
      for (std::size_t i = 0; i < v.size(); ++i) mean[i] += v[i] / static_cast<double>(chunks.size());
    }
    double norm = 0;
    for (double x : mean) norm += x * x;
    norm = std::sqrt(norm);
    CHECK(pooled.chunk_count == chunks.size());
    double max_err = 0;
    for (std::size_t i = 0; i < mean.size(); ++i) {
      const double expected = norm == 0.0 ? (i == 0 ? 1.0 : 0.0) : mean[i] / norm;
      max_err = std::max(max_err, std::abs(pooled.vector[i] - expected));
    }
    CHECK(max_err <= 1e-9);
  }
}

// ---------------------------------------------------------------------------
// Index and query

TEST_CASE("Ragindex: query returns the exact source first with score one", "[unit][ragindex]") {
  const auto gw = modelgw::Gateway::stub();
  VectorIndex index(gw.dims());
  index.add(build_entry("a", "Arctic sea ice thickness from sonar.", "", gw));
  index.add(build_entry("b", "Soil respiration in boreal forests.", "", gw));
  index.add(build_entry("c", "Gene expression in yeast under heat stress.", "", gw));
  const auto hits = query(index, "Soil respiration in boreal forests.", 3, gw);
  REQUIRE(hits.size() == 3);
  CHECK(hits[0].entry_id == "b");
  CHECK(hits[0].score == Catch::Approx(1.0).margin(1e-6));
  CHECK(query(index, "anything", 10, gw).size() == 3);
  CHECK_ERROR_CODE(query(index, "x", 0, gw), ErrorCode::kInvalidArgument);
  CHECK_ERROR_CODE(query(VectorIndex(gw.dims()), "x", 1, gw), ErrorCode::kEmptyIndex);
}

TEST_CASE("Ragindex: ties break by entry id", "[unit][ragindex]") {
  VectorIndex index(2);
  index.add(unit_entry("zeta", {1.0, 0.0}));
  index.add(unit_entry("alpha", {1.0, 0.0}));
  index.add(unit_entry("mid", {0.0, 1.0}));
  const auto hits = index.query_vector({1.0, 0.0}, 3);
  REQUIRE(hits.size() == 3);
  CHECK(hits[0].entry_id == "alpha");
  CHECK(hits[1].entry_id == "zeta");
  CHECK(hits[2].entry_id == "mid");
}

TEST_CASE("Ragindex: index rejects bad entries", "[unit][ragindex]") {
  VectorIndex index(2);
  index.add(unit_entry("a", {1.0, 0.0}));
  CHECK_ERROR_CODE(index.add(unit_entry("a", {0.0, 1.0})), ErrorCode::kInvalidArgument);
  CHECK_ERROR_CODE(index.add(unit_entry("b", {1.0, 0.0, 0.0})), ErrorCode::kDimMismatch);
  CHECK_ERROR_CODE(index.add(unit_entry("c", {2.0, 0.0})), ErrorCode::kInvalidArgument);
}

TEST_CASE("Ragindex: level filters restrict results", "[unit][ragindex]") {
  VectorIndex index(2);
  auto f = unit_entry("file1", {1.0, 0.0});
  f.level = Level::kFile;
  f.record_id = "rec";
  index.add(f);
  index.add(unit_entry("rec", {0.0, 1.0}));
  CHECK(index.query_vector({1.0, 0.0}, 5, LevelFilter::kRecord).size() == 1);
  CHECK(index.query_vector({1.0, 0.0}, 5, LevelFilter::kFile)[0].record_id == "rec");
  CHECK(index.query_vector({1.0, 0.0}, 5, LevelFilter::kAny).size() == 2);
}

TEST_CASE("Ragindex: scores are non-increasing and order-invariant", "[property][ragindex]") {
  const auto gw = modelgw::Gateway::stub();
  const auto bundles = testsupport::reports50(testsupport::fixtures());
  std::vector<IndexEntry> entries;
  for (const auto& b : bundles) {
    entries.push_back(build_entry(b.record.record_id, b.record.unified_summary, b.record.user_description, gw));
  }
  VectorIndex forward(gw.dims());
  for (const auto& e : entries) forward.add(e);
  Rng rng(77);
  auto shuffled = entries;
  rng.shuffle(shuffled);
  VectorIndex backward(gw.dims());
  for (const auto& e : shuffled) backward.add(e);

  for (const char* q : {"solar cell efficiency", "river sediment", "protein folding", "x"}) {
    const auto a = query(forward, q, 50, gw);
    const auto b = query(backward, q, 50, gw);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].entry_id == b[i].entry_id);
      CHECK(a[i].score == b[i].score);
      if (i > 0) CHECK(a[i].score <= a[i - 1].score);
    }
  }
}

TEST_CASE("Ragindex: self-retrieval over the corpus is perfect", "[property][ragindex]") {
  const auto gw = modelgw::Gateway::stub();
  const auto bundles = testsupport::reports50(testsupport::fixtures());
  BuildOptions opts;
  opts.clock = fixed_clock("2026-01-01T00:00:00Z");
  const auto index = build_index(bundles, gw, opts);
  REQUIRE(index.size() == 50);
  for (const auto& b : bundles) {
    const auto hits = query(index, entry_text(b.record.unified_summary, b.record.user_description), 1, gw);
    CHECK(hits[0].entry_id == b.record.record_id);
    CHECK(hits[0].score == Catch::Approx(1.0).margin(1e-6));
  }
}

TEST_CASE("Ragindex: build_index adds file entries for described files", "[unit][ragindex]") {
  const auto gw = modelgw::Gateway::stub();
  reports::RecordBundle b;
  b.record.record_id = "r1";
  b.record.unified_summary = "Coral bleaching survey.";
  reports::FileReport f1;
  f1.file_id = "f1";
  f1.record_id = "r1";
  f1.description = "Temperature logger table.";
  reports::FileReport f2 = f1;
  f2.file_id = "f2";
  f2.description = "";
  b.files = {f1, f2};
  BuildOptions opts;
  opts.clock = fixed_clock("t");
  const auto index = build_index({b}, gw, opts);
  CHECK(index.size() == 2);
  REQUIRE(index.find("f1") != nullptr);
  CHECK(index.find("f1")->level == Level::kFile);
  CHECK(index.find("f1")->record_id == "r1");
  CHECK(index.find("f2") == nullptr);
  CHECK(index.metadata().embedder == gw.embedder_identity());
  CHECK(index.metadata().built_at == "t");
  opts.include_files = false;
  CHECK(build_index({b}, gw, opts).size() == 1);
}

// ---------------------------------------------------------------------------
// Persistence

TEST_CASE("Ragindex: save and load round-trip exactly", "[unit][ragindex]") {
  const auto gw = modelgw::Gateway::stub();
  BuildOptions opts;
  opts.clock = fixed_clock("2026-01-01T00:00:00Z");
  const auto index = build_index(testsupport::reports50(testsupport::fixtures()), gw, opts);
  TempDir dir("idx");
  save_index(index, dir / "a.dsix");
  const auto back = load_index(dir / "a.dsix");
  CHECK(back == index);
  save_index(back, dir / "b.dsix");
  CHECK(fs::read_file(dir / "a.dsix") == fs::read_file(dir / "b.dsix"));
  for (std::size_t i = 0; i < index.size(); ++i) {
    CHECK(std::memcmp(index.entries()[i].vector.data(), back.entries()[i].vector.data(),
                      index.dims() * sizeof(double)) == 0);
  }
}

TEST_CASE("Ragindex: the binary header follows the documented layout", "[unit][ragindex]") {
  VectorIndex index(2);
  index.add(unit_entry("ab", {1.0, 0.0}));
  const auto bytes = serialize_index(index);
  CHECK(bytes.substr(0, 4) == "DSIX");
  std::uint32_t version = 0, dims = 0;
  std::uint64_t count = 0;
  std::memcpy(&version, bytes.data() + 4, 4);
  std::memcpy(&dims, bytes.data() + 8, 4);
  std::memcpy(&count, bytes.data() + 12, 8);
  CHECK(version == 1);
  CHECK(dims == 2);
  CHECK(count == 1);
  std::uint32_t id_len = 0;
  std::memcpy(&id_len, bytes.data() + 20, 4);
  CHECK(id_len == 2);
  CHECK(bytes.substr(24, 2) == "ab");
  CHECK(bytes[26] == 0);
  float x0 = 0;
  std::memcpy(&x0, bytes.data() + 27, 4);
  CHECK(x0 == 1.0f);
}

TEST_CASE("Ragindex: corrupt index files are rejected", "[unit][ragindex]") {
  VectorIndex index(2);
  index.add(unit_entry("a", {1.0, 0.0}));
  auto bytes = serialize_index(index);
  TempDir dir("bad");
  auto wrong = bytes;
  wrong[0] = 'X';
  fs::write_file_atomic(dir / "magic.dsix", wrong);
  CHECK_ERROR_CODE(load_index(dir / "magic.dsix"), ErrorCode::kVersionMismatch);
  fs::write_file_atomic(dir / "short.dsix", bytes.substr(0, 22));
  CHECK_ERROR_CODE(load_index(dir / "short.dsix"), ErrorCode::kIoFailure);
  auto future = bytes;
  future[4] = 9;
  fs::write_file_atomic(dir / "ver.dsix", future);
  CHECK_ERROR_CODE(load_index(dir / "ver.dsix"), ErrorCode::kVersionMismatch);
  CHECK_ERROR_CODE(load_index(dir / "missing.dsix"), ErrorCode::kIoFailure);
}
