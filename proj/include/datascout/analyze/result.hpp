// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "datascout/analyze/correlation.hpp"
#include "datascout/analyze/kde.hpp"
#include "datascout/analyze/predictability.hpp"
#include "datascout/analyze/words.hpp"
#include "datascout/core/error.hpp"
#include "datascout/core/fs.hpp"
#include "datascout/ingest/table.hpp"

namespace datascout::analyze {

inline constexpr int kSchemaVersion = 1;

enum class Modality { kTabular, kText, kImage };

inline std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::kTabular: return "tabular";
    case Modality::kText: return "text";
    case Modality::kImage: return "image";
  }
  return "tabular";
}

inline Modality modality_from_string(std::string_view s) {
  if (s == "tabular") return Modality::kTabular;
  if (s == "text") return Modality::kText;
  if (s == "image") return Modality::kImage;
  fail(ErrorCode::kParseError, "unknown modality " + std::string(s));
}

/// Value counts of a non-numeric column, descending with lexicographic ties.
struct CategoryFrequencies {
  std::string feature_name;
  ingest::FeatureKind kind = ingest::FeatureKind::kCategorical;
  std::vector<std::pair<std::string, std::size_t>> counts;
};

inline CategoryFrequencies category_frequencies(const ingest::Column& column) {
  std::map<std::string, std::size_t> counts;
  for (const auto& v : column.values) {
    if (v) ++counts[*v];
  }
  CategoryFrequencies out{column.name, column.kind, {counts.begin(), counts.end()}};
  std::stable_sort(out.counts.begin(), out.counts.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

struct FeatureInfo {
  std::string name;
  ingest::FeatureKind kind = ingest::FeatureKind::kCategorical;
  std::size_t non_null = 0;
};

struct TabularPayload {
  std::size_t row_count = 0;
  std::vector<FeatureInfo> features;
  std::vector<KdeProfile> kde;
  std::optional<CorrelationMatrix> correlations;
  std::vector<PredictabilityScore> predictability;
  std::vector<CategoryFrequencies> categories;
};

struct TextPayload {
  std::size_t token_count = 0;
  WordDistribution words;
  std::string summary;
  bool summary_available = true;
};

struct ImagePayload {
  std::size_t total_images = 0;
  std::vector<std::string> image_names;
  std::vector<std::string> captions;
};

using Payload = std::variant<TabularPayload, TextPayload, ImagePayload>;

struct AnalyzerResult {
  std::string file_id;
  std::string record_id;
  std::string file_name;
  Modality modality = Modality::kTabular;
  Payload payload;
  std::vector<std::string> notes;
  std::string produced_at;

  const TabularPayload* tabular() const { return std::get_if<TabularPayload>(&payload); }
  const TextPayload* text() const { return std::get_if<TextPayload>(&payload); }
  const ImagePayload* image() const { return std::get_if<ImagePayload>(&payload); }

  bool consistent() const {
    switch (modality) {
      case Modality::kTabular: return tabular() != nullptr;
      case Modality::kText: return text() != nullptr;
      case Modality::kImage: return image() != nullptr;
    }
    return false;
  }
};

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json kde_to_json(const KdeProfile& p) {
  return {{"feature_name", p.feature_name}, {"bandwidth", p.bandwidth}, {"sample_min", p.sample_min},
          {"sample_max", p.sample_max},     {"n", p.n},                 {"grid", p.grid},
          {"densities", p.densities},       {"samples", p.samples}};
}

inline KdeProfile kde_from_json(const nlohmann::json& j) {
  KdeProfile p;
  p.feature_name = j.at("feature_name").get<std::string>();
  p.bandwidth = j.at("bandwidth").get<double>();
  p.sample_min = j.at("sample_min").get<double>();
  p.sample_max = j.at("sample_max").get<double>();
  p.n = j.at("n").get<std::size_t>();
  p.grid = j.at("grid").get<std::vector<double>>();
  p.densities = j.at("densities").get<std::vector<double>>();
  p.samples = j.value("samples", std::vector<double>{});
  return p;
}

inline nlohmann::json counts_to_json(const std::vector<std::pair<std::string, std::size_t>>& counts) {
  auto arr = nlohmann::json::array();
  for (const auto& [k, c] : counts) arr.push_back({k, c});
  return arr;
}

inline std::vector<std::pair<std::string, std::size_t>> counts_from_json(const nlohmann::json& j) {
  std::vector<std::pair<std::string, std::size_t>> out;
  for (const auto& e : j) out.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::size_t>());
  return out;
}

inline nlohmann::json payload_to_json(const Payload& payload) {
  nlohmann::json j;
  if (const auto* t = std::get_if<TabularPayload>(&payload)) {
    j["row_count"] = t->row_count;
    j["features"] = nlohmann::json::array();
    for (const auto& f : t->features) {
      j["features"].push_back({{"name", f.name}, {"kind", ingest::to_string(f.kind)}, {"non_null", f.non_null}});
    }
    j["kde"] = nlohmann::json::array();
    for (const auto& p : t->kde) j["kde"].push_back(kde_to_json(p));
    if (t->correlations) {
      auto undefined = nlohmann::json::array();
      for (const auto& [a, b] : t->correlations->undefined_pairs) undefined.push_back({a, b});
      j["correlations"] = {{"feature_names", t->correlations->feature_names},
                           {"values", t->correlations->values},
                           {"undefined_pairs", undefined}};
    } else {
      j["correlations"] = nullptr;
    }
    j["predictability"] = nlohmann::json::array();
    for (const auto& s : t->predictability) {
      j["predictability"].push_back(
          {{"target_feature", s.target_feature}, {"score", s.score}, {"method", to_string(s.method)}});
    }
    j["categories"] = nlohmann::json::array();
    for (const auto& c : t->categories) {
      j["categories"].push_back(
          {{"feature_name", c.feature_name}, {"kind", ingest::to_string(c.kind)}, {"counts", counts_to_json(c.counts)}});
    }
  } else if (const auto* x = std::get_if<TextPayload>(&payload)) {
    j["token_count"] = x->token_count;
    j["words"] = {{"vocabulary", counts_to_json(x->words.vocabulary)},
                  {"total_tokens", x->words.total_tokens},
                  {"top_k", x->words.top_k}};
    j["summary"] = x->summary;
    j["summary_available"] = x->summary_available;
  } else if (const auto* m = std::get_if<ImagePayload>(&payload)) {
    j["total_images"] = m->total_images;
    j["image_names"] = m->image_names;
    j["captions"] = m->captions;
  }
  return j;
}

inline Payload payload_from_json(Modality modality, const nlohmann::json& j) {
  switch (modality) {
    case Modality::kTabular: {
      TabularPayload t;
      t.row_count = j.at("row_count").get<std::size_t>();
      for (const auto& f : j.at("features")) {
        t.features.push_back({f.at("name").get<std::string>(),
                              ingest::feature_kind_from_string(f.at("kind").get<std::string>()),
                              f.at("non_null").get<std::size_t>()});
      }
      for (const auto& p : j.at("kde")) t.kde.push_back(kde_from_json(p));
      if (!j.at("correlations").is_null()) {
        const auto& c = j.at("correlations");
        CorrelationMatrix m;
        m.feature_names = c.at("feature_names").get<std::vector<std::string>>();
        m.values = c.at("values").get<std::vector<double>>();
        for (const auto& u : c.at("undefined_pairs")) {
          m.undefined_pairs.emplace_back(u.at(0).get<std::string>(), u.at(1).get<std::string>());
        }
        t.correlations = std::move(m);
      }
      for (const auto& s : j.at("predictability")) {
        t.predictability.push_back({s.at("target_feature").get<std::string>(), s.at("score").get<double>(),
                                    s.at("method").get<std::string>() == "linear-r2"
                                        ? PredictabilityMethod::kLinearR2
                                        : PredictabilityMethod::kClassificationUplift});
      }
      for (const auto& c : j.at("categories")) {
        t.categories.push_back({c.at("feature_name").get<std::string>(),
                                ingest::feature_kind_from_string(c.at("kind").get<std::string>()),
                                counts_from_json(c.at("counts"))});
      }
      return t;
    }
    case Modality::kText: {
      TextPayload x;
      x.token_count = j.at("token_count").get<std::size_t>();
      x.words.vocabulary = counts_from_json(j.at("words").at("vocabulary"));
      x.words.total_tokens = j.at("words").at("total_tokens").get<std::size_t>();
      x.words.top_k = j.at("words").at("top_k").get<std::size_t>();
      x.summary = j.at("summary").get<std::string>();
      x.summary_available = j.at("summary_available").get<bool>();
      return x;
    }
    case Modality::kImage: {
      ImagePayload m;
      m.total_images = j.at("total_images").get<std::size_t>();
      m.image_names = j.at("image_names").get<std::vector<std::string>>();
      m.captions = j.at("captions").get<std::vector<std::string>>();
      return m;
    }
  }
  fail(ErrorCode::kParseError, "unknown modality");
}

/// Full JSON form with every array inline.
inline nlohmann::json to_json(const AnalyzerResult& r) {
  return {{"schema_version", kSchemaVersion},
          {"file_id", r.file_id},
          {"record_id", r.record_id},
          {"file_name", r.file_name},
          {"modality", to_string(r.modality)},
          {"payload", payload_to_json(r.payload)},
          {"notes", r.notes},
          {"produced_at", r.produced_at}};
}

inline AnalyzerResult result_from_json(const nlohmann::json& j) {
  require(j.value("schema_version", 0) == kSchemaVersion, ErrorCode::kVersionMismatch,
          "unsupported analyzer result schema");
  AnalyzerResult r;
  r.file_id = j.at("file_id").get<std::string>();
  r.record_id = j.value("record_id", std::string{});
  r.file_name = j.value("file_name", std::string{});
  r.modality = modality_from_string(j.at("modality").get<std::string>());
  r.payload = payload_from_json(r.modality, j.at("payload"));
  r.notes = j.value("notes", std::vector<std::string>{});
  r.produced_at = j.value("produced_at", std::string{});
  return r;
}

/// Canonical string for the content store: the inline JSON without the
/// timestamp, so identical analyses hash identically.
inline std::string content_string(const AnalyzerResult& r) {
  auto j = to_json(r);
  j.erase("produced_at");
  return j.dump();
}

// ---------------------------------------------------------------------------
// Binary sidecar: "DSAS", u32 version, u32 block count, then per block a u64
// length and that many little-endian f64 values. Float arrays of at least
// kSidecarMinLength elements are moved out of the JSON and replaced by
// {"$sidecar": block_index}.

inline constexpr char kSidecarMagic[4] = {'D', 'S', 'A', 'S'};
inline constexpr std::uint32_t kSidecarVersion = 1;
inline constexpr std::size_t kSidecarMinLength = 8;

namespace detail {

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::endian::native == std::endian::little, "little-endian host required");
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get_le(std::string_view in, std::size_t& pos) {
  require(pos + sizeof(T) <= in.size(), ErrorCode::kIoFailure, "truncated sidecar");
  T value;
  std::memcpy(&value, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

inline bool is_float_array(const nlohmann::json& j) {
  if (!j.is_array() || j.size() < kSidecarMinLength) return false;
  return std::all_of(j.begin(), j.end(), [](const auto& v) { return v.is_number_float(); });
}

inline void extract_arrays(nlohmann::json& j, std::vector<std::vector<double>>& blocks) {
  if (is_float_array(j)) {
    blocks.push_back(j.get<std::vector<double>>());
    j = {{"$sidecar", blocks.size() - 1}};
    return;
  }
  if (j.is_object() || j.is_array()) {
    for (auto& child : j) extract_arrays(child, blocks);
  }
}

inline void restore_arrays(nlohmann::json& j, const std::vector<std::vector<double>>& blocks) {
  if (j.is_object() && j.size() == 1 && j.contains("$sidecar")) {
    const auto idx = j["$sidecar"].get<std::size_t>();
    require(idx < blocks.size(), ErrorCode::kParseError, "sidecar block out of range");
    j = blocks[idx];
    return;
  }
  if (j.is_object() || j.is_array()) {
    for (auto& child : j) restore_arrays(child, blocks);
  }
}

}  // namespace detail

struct SplitDocument {
  nlohmann::json json;
  std::string sidecar;
};

inline SplitDocument split_sidecar(nlohmann::json j) {
  std::vector<std::vector<double>> blocks;
  detail::extract_arrays(j, blocks);
  std::string bin(kSidecarMagic, sizeof(kSidecarMagic));
  detail::put_le<std::uint32_t>(bin, kSidecarVersion);
  detail::put_le<std::uint32_t>(bin, static_cast<std::uint32_t>(blocks.size()));
  for (const auto& b : blocks) {
    detail::put_le<std::uint64_t>(bin, b.size());
    for (double v : b) detail::put_le<double>(bin, v);
  }
  return {std::move(j), std::move(bin)};
}

inline nlohmann::json join_sidecar(nlohmann::json j, std::string_view sidecar) {
  require(sidecar.size() >= 12 && sidecar.substr(0, 4) == std::string_view(kSidecarMagic, 4),
          ErrorCode::kVersionMismatch, "not a sidecar file");
  std::size_t pos = 4;
  require(detail::get_le<std::uint32_t>(sidecar, pos) == kSidecarVersion, ErrorCode::kVersionMismatch,
          "unsupported sidecar version");
  const auto count = detail::get_le<std::uint32_t>(sidecar, pos);
  std::vector<std::vector<double>> blocks(count);
  for (auto& b : blocks) {
    const auto n = detail::get_le<std::uint64_t>(sidecar, pos);
    require(n <= (sidecar.size() - pos) / sizeof(double), ErrorCode::kIoFailure, "truncated sidecar");
    b.resize(n);
    for (auto& v : b) v = detail::get_le<double>(sidecar, pos);
  }
  detail::restore_arrays(j, blocks);
  return j;
}

/// Writes {dir}/{file_id}.json and its sidecar {dir}/{file_id}.bin.
inline void save_result(const AnalyzerResult& r, const std::filesystem::path& dir) {
  auto doc = split_sidecar(to_json(r));
  fs::write_file_atomic(dir / (r.file_id + ".bin"), doc.sidecar);
  fs::write_file_atomic(dir / (r.file_id + ".json"), doc.json.dump(2) + "\n");
}

inline AnalyzerResult load_result(const std::filesystem::path& json_path) {
  auto j = nlohmann::json::parse(fs::read_file(json_path));
  auto bin_path = json_path;
  bin_path.replace_extension(".bin");
  if (std::filesystem::exists(bin_path)) j = join_sidecar(std::move(j), fs::read_file(bin_path));
  return result_from_json(j);
}

}  // namespace datascout::analyze
