// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "datascout/core/clock.hpp"
#include "datascout/core/error.hpp"
#include "datascout/core/fs.hpp"
#include "datascout/core/hash.hpp"
#include "datascout/core/text.hpp"
#include "datascout/modelgw.hpp"
#include "datascout/reports.hpp"

namespace datascout::ragindex {

inline constexpr std::size_t kDefaultChunkTokens = 256;
inline constexpr std::size_t kDefaultOverlapTokens = 32;
inline constexpr std::string_view kDescriptionSeparator = "\n\n---\n\n";

enum class Level : std::uint8_t { kRecord = 0, kFile = 1 };
enum class LevelFilter { kRecord, kFile, kAny };

inline std::string_view to_string(Level l) { return l == Level::kRecord ? "record" : "file"; }

inline bool matches(Level level, LevelFilter filter) {
  return filter == LevelFilter::kAny || (filter == LevelFilter::kRecord) == (level == Level::kRecord);
}

struct ChunkOptions {
  std::size_t chunk_tokens = kDefaultChunkTokens;
  std::size_t overlap_tokens = kDefaultOverlapTokens;
};

/// Greedy token windows of `chunk_tokens` starting every
/// chunk_tokens - overlap_tokens tokens; the final partial window is kept.
inline std::vector<std::string> chunk_text(std::string_view text, std::size_t chunk_tokens = kDefaultChunkTokens,
                                           std::size_t overlap_tokens = kDefaultOverlapTokens) {
  require(chunk_tokens > overlap_tokens, ErrorCode::kInvalidArgument,
          "invalid-params: chunk_tokens must exceed overlap_tokens");
  const auto spans = text::tokenize(text);
  if (spans.size() <= chunk_tokens) return {std::string(text)};
  const std::size_t stride = chunk_tokens - overlap_tokens;
  std::vector<std::string> out;
  for (std::size_t start = 0;; start += stride) {
    const std::size_t end = std::min(spans.size(), start + chunk_tokens);
    out.emplace_back(text.substr(spans[start].begin, spans[end - 1].end - spans[start].begin));
    if (end == spans.size()) break;
  }
  return out;
}

inline double dot(const std::vector<double>& u, const std::vector<double>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

inline double cosine(const std::vector<double>& u, const std::vector<double>& v) {
  require(u.size() == v.size(), ErrorCode::kDimMismatch,
          "cosine of " + std::to_string(u.size()) + " and " + std::to_string(v.size()) + " dims");
  const double nu = std::sqrt(dot(u, u));
  const double nv = std::sqrt(dot(v, v));
  require(nu > 0.0 && nv > 0.0, ErrorCode::kZeroVector, "cosine of a zero vector");
  return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

struct PooledEmbedding {
  std::vector<double> vector;
  std::size_t chunk_count = 0;
};

/// Unit-normalised arithmetic mean of the chunk embeddings.
inline PooledEmbedding chunk_average(std::string_view text, const modelgw::Gateway& gateway,
                                     const ChunkOptions& options = {}) {
  const auto chunks = chunk_text(text, options.chunk_tokens, options.overlap_tokens);
  const auto vectors = gateway.embed_batch(chunks);
  PooledEmbedding out;
  out.chunk_count = vectors.size();
  out.vector.assign(gateway.dims(), 0.0);
  for (const auto& v : vectors) {
    for (std::size_t i = 0; i < v.values.size(); ++i) out.vector[i] += v.values[i];
  }
  for (auto& x : out.vector) x /= static_cast<double>(vectors.size());
  modelgw::normalize_in_place(out.vector);
  return out;
}

struct IndexEntry {
  std::string entry_id;
  Level level = Level::kRecord;
  std::vector<double> vector;
  std::size_t chunk_count = 1;
  std::string source_text_hash;
  std::string record_id;  // owning record; equals entry_id for record entries

  bool operator==(const IndexEntry&) const = default;
};

inline std::string entry_text(std::string_view generated, std::string_view user) {
  const bool has_gen = !text::trim(generated).empty();
  const bool has_user = !text::trim(user).empty();
  require(has_gen || has_user, ErrorCode::kAllEmptyDescriptions, "both descriptions are empty");
  if (has_gen && has_user) return std::string(generated) + std::string(kDescriptionSeparator) + std::string(user);
  return std::string(has_gen ? generated : user);
}

inline IndexEntry build_entry(std::string entry_id, std::string_view generated_description,
                              std::string_view user_description, const modelgw::Gateway& gateway,
                              Level level = Level::kRecord, std::string record_id = {},
                              const ChunkOptions& options = {}) {
  const auto text = entry_text(generated_description, user_description);
  auto pooled = chunk_average(text, gateway, options);
  IndexEntry e;
  e.record_id = record_id.empty() ? entry_id : std::move(record_id);
  e.entry_id = std::move(entry_id);
  e.level = level;
  e.vector = std::move(pooled.vector);
  e.chunk_count = pooled.chunk_count;
  e.source_text_hash = hashing::sha256_hex(text);
  return e;
}

struct IndexMetadata {
  std::string embedder;
  std::string built_at;
  std::size_t chunk_tokens = kDefaultChunkTokens;
  std::size_t overlap_tokens = kDefaultOverlapTokens;

  bool operator==(const IndexMetadata&) const = default;
};

struct ScoredEntry {
  std::string entry_id;
  double score = 0.0;
  Level level = Level::kRecord;
  std::string record_id;
};

/// Exhaustive-scan cosine index. Vectors are stored at float precision, the
/// precision of the on-disk format.
class VectorIndex {
 public:
  explicit VectorIndex(std::size_t dims = 0, IndexMetadata metadata = {}) : dims_(dims), metadata_(std::move(metadata)) {}

  void add(IndexEntry entry) {
    if (dims_ == 0) dims_ = entry.vector.size();
    require(entry.vector.size() == dims_, ErrorCode::kDimMismatch,
            "entry " + entry.entry_id + " has " + std::to_string(entry.vector.size()) + " dims, index has " +
                std::to_string(dims_));
    require(!entry.entry_id.empty(), ErrorCode::kInvalidArgument, "empty entry id");
    require(entry.chunk_count >= 1, ErrorCode::kInvalidArgument, "chunk_count must be >= 1");
    require(by_id_.count(entry.entry_id) == 0, ErrorCode::kInvalidArgument, "duplicate entry id " + entry.entry_id);
    for (auto& x : entry.vector) x = static_cast<double>(static_cast<float>(x));
    const double norm = std::sqrt(dot(entry.vector, entry.vector));
    require(std::abs(norm - 1.0) <= 1e-6, ErrorCode::kInvalidArgument, "entry " + entry.entry_id + " is not unit norm");
    if (entry.record_id.empty()) entry.record_id = entry.entry_id;
    by_id_[entry.entry_id] = entries_.size();
    entries_.push_back(std::move(entry));
  }

  const std::vector<IndexEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t dims() const { return dims_; }
  const IndexMetadata& metadata() const { return metadata_; }
  IndexMetadata& metadata() { return metadata_; }

  const IndexEntry* find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &entries_[it->second];
  }

  /// Top-k by cosine, descending, ties by entry id; k is capped at the number
  /// of entries passing the filter.
  std::vector<ScoredEntry> query_vector(const std::vector<double>& q, std::size_t k,
                                        LevelFilter filter = LevelFilter::kAny) const {
    require(!entries_.empty(), ErrorCode::kEmptyIndex, "index is empty");
    require(k >= 1, ErrorCode::kInvalidArgument, "k must be >= 1");
    std::vector<ScoredEntry> scored;
    for (const auto& e : entries_) {
      if (!matches(e.level, filter)) continue;
      scored.push_back({e.entry_id, cosine(q, e.vector), e.level, e.record_id});
    }
    std::sort(scored.begin(), scored.end(), [](const ScoredEntry& a, const ScoredEntry& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.entry_id < b.entry_id;
    });
    if (scored.size() > k) scored.resize(k);
    return scored;
  }

  bool operator==(const VectorIndex& o) const {
    return dims_ == o.dims_ && metadata_ == o.metadata_ && entries_ == o.entries_;
  }

 private:
  std::size_t dims_;
  IndexMetadata metadata_;
  std::vector<IndexEntry> entries_;
  std::map<std::string, std::size_t> by_id_;
};

inline std::vector<ScoredEntry> query(const VectorIndex& index, std::string_view text, std::size_t k,
                                      const modelgw::Gateway& gateway, LevelFilter filter = LevelFilter::kAny) {
  require(!index.empty(), ErrorCode::kEmptyIndex, "index is empty");
  const auto& m = index.metadata();
  const auto q = chunk_average(text, gateway, {m.chunk_tokens, m.overlap_tokens});
  return index.query_vector(q.vector, k, filter);
}

// ---------------------------------------------------------------------------
// Binary format: "DSIX", u32 version, u32 dims, u64 count, then per entry a
// u32-length-prefixed UTF-8 id, a level byte and dims little-endian f32
// values. A trailing "META" block (u64 length, JSON) carries the metadata and
// per-entry chunk counts, text hashes and owning records.

inline constexpr char kIndexMagic[4] = {'D', 'S', 'I', 'X'};
inline constexpr char kMetaTag[4] = {'M', 'E', 'T', 'A'};
inline constexpr std::uint32_t kIndexVersion = 1;

namespace detail {

template <typename T>
void put(std::string& out, T value) {
  static_assert(std::endian::native == std::endian::little, "little-endian host required");
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T take(std::string_view in, std::size_t& pos) {
  require(pos + sizeof(T) <= in.size(), ErrorCode::kIoFailure, "truncated index file");
  T value;
  std::memcpy(&value, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

}  // namespace detail

inline std::string serialize_index(const VectorIndex& index) {
  std::string out(kIndexMagic, 4);
  detail::put<std::uint32_t>(out, kIndexVersion);
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(index.dims()));
  detail::put<std::uint64_t>(out, index.size());
  auto extras = nlohmann::json::array();
  for (const auto& e : index.entries()) {
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(e.entry_id.size()));
    out += e.entry_id;
    detail::put<std::uint8_t>(out, static_cast<std::uint8_t>(e.level));
    for (double x : e.vector) detail::put<float>(out, static_cast<float>(x));
    extras.push_back({{"chunk_count", e.chunk_count}, {"source_text_hash", e.source_text_hash}, {"record_id", e.record_id}});
  }
  const auto& m = index.metadata();
  const nlohmann::json meta = {{"embedder", m.embedder},
                               {"built_at", m.built_at},
                               {"chunk_tokens", m.chunk_tokens},
                               {"overlap_tokens", m.overlap_tokens},
                               {"entries", extras}};
  const auto meta_text = meta.dump();
  out.append(kMetaTag, 4);
  detail::put<std::uint64_t>(out, meta_text.size());
  out += meta_text;
  return out;
}

inline VectorIndex deserialize_index(std::string_view bytes) {
  require(bytes.size() >= 4 && bytes.substr(0, 4) == std::string_view(kIndexMagic, 4), ErrorCode::kVersionMismatch,
          "not an index file (bad magic)");
  std::size_t pos = 4;
  const auto version = detail::take<std::uint32_t>(bytes, pos);
  require(version == kIndexVersion, ErrorCode::kVersionMismatch, "unsupported index version " + std::to_string(version));
  const auto dims = detail::take<std::uint32_t>(bytes, pos);
  const auto count = detail::take<std::uint64_t>(bytes, pos);
  std::vector<IndexEntry> entries;
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto len = detail::take<std::uint32_t>(bytes, pos);
    require(pos + len <= bytes.size(), ErrorCode::kIoFailure, "truncated index file");
    IndexEntry e;
    e.entry_id = std::string(bytes.substr(pos, len));
    pos += len;
    const auto level = detail::take<std::uint8_t>(bytes, pos);
    require(level <= 1, ErrorCode::kIoFailure, "bad level byte");
    e.level = static_cast<Level>(level);
    require(pos + std::size_t{dims} * 4 <= bytes.size(), ErrorCode::kIoFailure, "truncated index file");
    e.vector.resize(dims);
    for (auto& x : e.vector) x = static_cast<double>(detail::take<float>(bytes, pos));
    e.record_id = e.entry_id;
    entries.push_back(std::move(e));
  }
  IndexMetadata meta;
  if (pos < bytes.size()) {
    require(bytes.size() - pos >= 12 && bytes.substr(pos, 4) == std::string_view(kMetaTag, 4), ErrorCode::kIoFailure,
            "corrupt index trailer");
    pos += 4;
    const auto len = detail::take<std::uint64_t>(bytes, pos);
    require(len <= bytes.size() - pos, ErrorCode::kIoFailure, "truncated index metadata");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(bytes.substr(pos, len));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kIoFailure, std::string("corrupt index metadata: ") + e.what());
    }
    meta.embedder = j.value("embedder", std::string{});
    meta.built_at = j.value("built_at", std::string{});
    meta.chunk_tokens = j.value("chunk_tokens", kDefaultChunkTokens);
    meta.overlap_tokens = j.value("overlap_tokens", kDefaultOverlapTokens);
    const auto& extras = j.at("entries");
    require(extras.size() == entries.size(), ErrorCode::kIoFailure, "index metadata does not match entries");
    for (std::size_t i = 0; i < entries.size(); ++i) {
      entries[i].chunk_count = extras[i].value("chunk_count", std::size_t{1});
      entries[i].source_text_hash = extras[i].value("source_text_hash", std::string{});
      entries[i].record_id = extras[i].value("record_id", entries[i].entry_id);
    }
  }
  VectorIndex index(dims, meta);
  for (auto& e : entries) index.add(std::move(e));
  return index;
}

inline void save_index(const VectorIndex& index, const std::filesystem::path& path) {
  fs::write_file_atomic(path, serialize_index(index));
}

inline VectorIndex load_index(const std::filesystem::path& path) {
  std::string bytes;
  try {
    bytes = fs::read_file(path);
  } catch (const Error& e) {
    fail(ErrorCode::kIoFailure, std::string("cannot read index: ") + e.what());
  }
  return deserialize_index(bytes);
}

// ---------------------------------------------------------------------------

struct BuildOptions {
  ChunkOptions chunks;
  bool include_files = true;
  Clock clock = system_clock();
};

/// Record entries from generated summary plus user description, and file
/// entries from each file description. Files without a description are
/// skipped.
inline VectorIndex build_index(const std::vector<reports::RecordBundle>& bundles, const modelgw::Gateway& gateway,
                               const BuildOptions& options = {}) {
  VectorIndex index(gateway.dims(), IndexMetadata{gateway.embedder_identity(), options.clock(),
                                                  options.chunks.chunk_tokens, options.chunks.overlap_tokens});
  for (const auto& b : bundles) {
    const auto& rid = b.record.record_id;
    index.add(build_entry(rid, b.record.unified_summary, b.record.user_description, gateway, Level::kRecord, rid,
                          options.chunks));
    if (!options.include_files) continue;
    for (const auto& f : b.files) {
      if (text::trim(f.description).empty()) continue;
      index.add(build_entry(f.file_id, f.description, {}, gateway, Level::kFile, rid, options.chunks));
    }
  }
  return index;
}

}  // namespace datascout::ragindex
