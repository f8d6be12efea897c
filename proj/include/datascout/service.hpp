// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "datascout/core/error.hpp"
#include "datascout/core/text.hpp"
#include "datascout/layout.hpp"
#include "datascout/modelgw.hpp"
#include "datascout/ragindex.hpp"
#include "datascout/reports.hpp"

namespace datascout::service {

inline constexpr std::size_t kGraphNodeCap = 200;
inline constexpr std::size_t kSnippetTokens = 40;
inline constexpr std::size_t kDefaultK = 10;

/// An index plus the reports it was built from; immutable once loaded.
struct Catalog {
  ragindex::VectorIndex index;
  std::map<std::string, reports::RecordBundle> bundles;

  static Catalog load(const std::filesystem::path& index_path, const std::optional<std::filesystem::path>& reports_dir) {
    Catalog c;
    c.index = ragindex::load_index(index_path);
    if (reports_dir) {
      for (auto& b : reports::load_reports(*reports_dir)) {
        auto id = b.record.record_id;
        c.bundles.emplace(std::move(id), std::move(b));
      }
    }
    return c;
  }

  const reports::RecordBundle* bundle(const std::string& record_id) const {
    auto it = bundles.find(record_id);
    return it == bundles.end() ? nullptr : &it->second;
  }

  /// Record ids from the reports, else from the index's record entries.
  std::vector<std::string> record_ids() const {
    std::vector<std::string> out;
    if (!bundles.empty()) {
      for (const auto& [id, b] : bundles) out.push_back(id);
      return out;
    }
    for (const auto& e : index.entries()) {
      if (e.level == ragindex::Level::kRecord) out.push_back(e.entry_id);
    }
    std::sort(out.begin(), out.end());
    return out;
  }
};

/// Leading `max_tokens` tokens of `s`, with "..." when cut.
inline std::string snippet(std::string_view s, std::size_t max_tokens = kSnippetTokens) {
  const auto spans = text::tokenize(s);
  if (spans.size() <= max_tokens) return std::string(text::trim(s));
  return std::string(text::trim(s.substr(0, spans[max_tokens - 1].end))) + "...";
}

struct QueryHit {
  std::string record_id;
  double score = 0.0;
  std::string title;
  std::string snippet;
};

inline nlohmann::json graph_json(const Catalog& catalog, const std::vector<double>& query_vector) {
  layout::GraphOptions options;
  options.max_nodes = kGraphNodeCap;
  const auto graph = layout::build_graph(catalog.index, query_vector, options);
  const auto positions = layout::fr_layout(graph);
  return layout::layout_json(graph, positions);
}

inline std::vector<double> embed_query(const Catalog& catalog, std::string_view q, const modelgw::Gateway& gateway) {
  const auto& m = catalog.index.metadata();
  return ragindex::chunk_average(q, gateway, {m.chunk_tokens, m.overlap_tokens}).vector;
}

/// {query, results: [{record_id, score, title, snippet}], graph}. Results
/// are record-level entries in descending score order.
inline nlohmann::json query_response(const Catalog& catalog, const modelgw::Gateway& gateway, const std::string& q,
                                     std::size_t k = kDefaultK) {
  require(!text::trim(q).empty(), ErrorCode::kInvalidArgument, "empty query");
  require(k >= 1, ErrorCode::kInvalidArgument, "k must be >= 1");
  const auto qv = embed_query(catalog, q, gateway);
  const auto hits = catalog.index.query_vector(qv, k, ragindex::LevelFilter::kRecord);
  nlohmann::json results = nlohmann::json::array();
  for (const auto& h : hits) {
    QueryHit hit{h.record_id, h.score, {}, {}};
    if (const auto* b = catalog.bundle(h.record_id)) {
      hit.title = b->record.title;
      hit.snippet = snippet(b->record.unified_summary);
    }
    results.push_back({{"record_id", hit.record_id}, {"score", hit.score}, {"title", hit.title}, {"snippet", hit.snippet}});
  }
  return {{"query", q}, {"results", results}, {"graph", graph_json(catalog, qv)}};
}

inline nlohmann::json graph_response(const Catalog& catalog, const modelgw::Gateway& gateway, const std::string& q) {
  require(!text::trim(q).empty(), ErrorCode::kInvalidArgument, "empty query");
  return graph_json(catalog, embed_query(catalog, q, gateway));
}

inline nlohmann::json records_response(const Catalog& catalog) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& id : catalog.record_ids()) {
    nlohmann::json r{{"record_id", id}, {"title", ""}, {"file_count", 0}};
    if (const auto* b = catalog.bundle(id)) {
      r["title"] = b->record.title;
      r["file_count"] = b->files.size();
    }
    arr.push_back(std::move(r));
  }
  return {{"records", arr}};
}

/// {record, files} or nullopt for an unknown record.
inline std::optional<nlohmann::json> report_response(const Catalog& catalog, const std::string& record_id) {
  const auto* b = catalog.bundle(record_id);
  if (b == nullptr) return std::nullopt;
  nlohmann::json files = nlohmann::json::array();
  for (const auto& f : b->files) files.push_back(reports::to_json(f));
  return nlohmann::json{{"record", reports::to_json(b->record)}, {"files", files}};
}

inline nlohmann::json error_body(std::string_view code, std::string_view message) {
  return {{"error", std::string(code)}, {"message", std::string(message)}};
}

}  // namespace datascout::service
