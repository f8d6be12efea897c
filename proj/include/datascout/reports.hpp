// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "datascout/analyze/result.hpp"
#include "datascout/analyze/text_summary.hpp"
#include "datascout/core/clock.hpp"
#include "datascout/core/error.hpp"
#include "datascout/core/fs.hpp"
#include "datascout/core/hash.hpp"
#include "datascout/core/text.hpp"
#include "datascout/modelgw.hpp"
#include "datascout/prompts.hpp"

namespace datascout::reports {

/// Strings keyed by the hex SHA-256 of their UTF-8 bytes, one file each.
class ContentStore {
 public:
  explicit ContentStore(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  std::string store(std::string_view s) const {
    const auto hash = hashing::sha256_hex(s);
    const auto path = path_for(hash);
    std::lock_guard lock(mu_);
    if (!std::filesystem::exists(path)) fs::write_file_atomic(path, s);
    return hash;
  }

  std::string get(const std::string& hash) const {
    const auto path = path_for(hash);
    require(valid_hash(hash) && std::filesystem::exists(path), ErrorCode::kUnknownHash, "unknown hash " + hash);
    return fs::read_file(path);
  }

  bool contains(const std::string& hash) const { return valid_hash(hash) && std::filesystem::exists(path_for(hash)); }

  /// Number of stored strings.
  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir_)) n += valid_hash(e.path().filename().string());
    return n;
  }

  std::filesystem::path path_for(const std::string& hash) const { return dir_ / hash; }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  static bool valid_hash(std::string_view h) {
    return h.size() == 64 && std::all_of(h.begin(), h.end(), [](char c) {
             return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
           });
  }

  std::filesystem::path dir_;
  mutable std::mutex mu_;
};

/// Stores the analyzer result string and its binary sidecar ({hash}.bin).
inline std::string store_analysis(const ContentStore& store, const analyze::AnalyzerResult& result) {
  const auto s = analyze::content_string(result);
  const auto hash = store.store(s);
  auto doc = analyze::split_sidecar(nlohmann::json::parse(s));
  fs::write_file_atomic(store.dir() / (hash + ".bin"), doc.sidecar);
  return hash;
}

// ---------------------------------------------------------------------------
// Map stage rendering

inline constexpr std::size_t kMapInputTokens = 1500;
inline constexpr std::size_t kRenderTopPairs = 5;
inline constexpr std::size_t kRenderTopWords = 20;
inline constexpr std::size_t kRenderTopCategories = 10;

inline std::string counts_text(const std::vector<std::pair<std::string, std::size_t>>& counts, std::size_t k) {
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < std::min(k, counts.size()); ++i) {
    parts.push_back(counts[i].first + " (" + std::to_string(counts[i].second) + ")");
  }
  return text::join(parts, ", ");
}

/// Renders one analyzer result as plain sentences, capped at kMapInputTokens
/// tokens by keeping head and tail halves.
inline std::string render_result(const analyze::AnalyzerResult& r) {
  std::vector<std::string> lines;
  if (const auto* t = r.tabular()) {
    std::vector<std::string> names;
    for (const auto& f : t->features) names.push_back(f.name);
    lines.push_back("File " + r.file_name + " is a table with " + std::to_string(t->row_count) +
                    " rows and columns: " + text::join(names, ", ") + ".");
    std::vector<std::string> kinds;
    for (const auto& f : t->features) kinds.push_back(f.name + " is " + std::string(ingest::to_string(f.kind)));
    lines.push_back("Feature types: " + text::join(kinds, "; ") + ".");
    for (const auto& p : t->kde) {
      lines.push_back("KDE of " + p.feature_name + ": min " + text::format_fixed(p.sample_min) + ", max " +
                      text::format_fixed(p.sample_max) + ", mode " + text::format_fixed(p.mode()) + ", bandwidth " +
                      text::format_fixed(p.bandwidth) + ".");
    }
    if (t->correlations) {
      std::vector<std::string> pairs;
      for (const auto& [ab, v] : t->correlations->top_pairs(kRenderTopPairs)) {
        pairs.push_back(ab.first + " and " + ab.second + " r=" + text::format_fixed(v, 3));
      }
      if (!pairs.empty()) lines.push_back("Strongest correlations: " + text::join(pairs, "; ") + ".");
    }
    for (const auto& s : t->predictability) {
      lines.push_back("Predictability of " + s.target_feature + " from the other features: " +
                      text::format_fixed(s.score, 3) + " (" + std::string(analyze::to_string(s.method)) +
                      ", stand-in measure).");
    }
    for (const auto& c : t->categories) {
      lines.push_back("Values of " + c.feature_name + ": " + counts_text(c.counts, kRenderTopCategories) + ".");
    }
  } else if (const auto* x = r.text()) {
    lines.push_back("File " + r.file_name + " is a text document with " + std::to_string(x->token_count) +
                    " tokens.");
    if (!x->words.vocabulary.empty()) {
      lines.push_back("Most frequent words: " + counts_text(x->words.vocabulary, kRenderTopWords) + ".");
    }
    if (x->summary_available && !x->summary.empty()) lines.push_back("Key points:\n" + x->summary);
  } else if (const auto* m = r.image()) {
    lines.push_back("File " + r.file_name + " is an image.");
    for (const auto& c : m->captions) lines.push_back("Caption: " + c);
  }
  for (const auto& n : r.notes) lines.push_back("Note: " + n);
  // the truncation marker itself costs five tokens
  return text::truncate_tokens(text::join(lines, "\n"), kMapInputTokens - 5);
}

struct ContentSummary {
  std::string text;
  bool partial = false;
  std::vector<std::string> map_outputs;
  std::vector<std::string> notes;
};

/// Map-reduce data content summary over analyzer results.
inline ContentSummary data_content_summary(const std::vector<analyze::AnalyzerResult>& results,
                                           const modelgw::Gateway& gateway) {
  require(!results.empty(), ErrorCode::kPrecondition, "data content summary needs at least one result");
  ContentSummary out;
  for (const auto& r : results) {
    try {
      out.map_outputs.push_back(gateway.chat(std::string(prompts::kMapAnalysis) + render_result(r)));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kGatewayFailure) throw;
      out.partial = true;
      out.notes.push_back("map failed for " + r.file_name + ": " + e.what());
    }
  }
  if (out.map_outputs.empty()) fail(ErrorCode::kGatewayFailure, "every map call failed");
  try {
    out.text = analyze::reduce_texts(out.map_outputs, gateway, prompts::kReduceContent);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kGatewayFailure) throw;
    out.partial = true;
    out.notes.push_back(std::string("reduce failed: ") + e.what());
    out.text = text::join(out.map_outputs, "\n");
  }
  return out;
}

// ---------------------------------------------------------------------------
// File report

struct FileReport {
  std::string file_id;
  std::string record_id;
  std::string file_name;
  std::string description;
  std::string domain;
  std::vector<std::string> keywords;
  std::vector<std::string> statistics_ref;
  nlohmann::json model_config_snapshot = nlohmann::json::object();
  std::vector<std::string> flags;
  std::string generated_at;

  std::size_t description_chars() const { return description.size(); }
  std::size_t description_tokens() const { return text::count_tokens(description); }
};

struct ParsedReport {
  std::string description;
  std::string domain;
  std::vector<std::string> keywords;
  std::vector<std::string> flags;
};

namespace detail {

/// Header name when the line opens a "Description:", "Domain:" or "Keywords:"
/// section, tolerating markdown decoration around the header.
inline std::string section_header(std::string_view line, std::string& rest) {
  auto v = text::trim(line);
  while (!v.empty() && (v.front() == '*' || v.front() == '#' || v.front() == '-' || v.front() == '_')) {
    v.remove_prefix(1);
    v = text::trim(v);
  }
  for (std::string_view name : {"description", "domain", "keywords"}) {
    if (!text::starts_with_ci(v, name)) continue;
    auto after = v.substr(name.size());
    while (!after.empty() && (after.front() == '*' || after.front() == '_')) after.remove_prefix(1);
    if (after.empty() || after.front() != ':') continue;
    after.remove_prefix(1);
    while (!after.empty() && (after.front() == '*' || after.front() == '_')) after.remove_prefix(1);
    rest = std::string(text::trim(after));
    return std::string(name);
  }
  return {};
}

}  // namespace detail

inline constexpr std::size_t kMaxKeywords = 7;
inline constexpr std::size_t kMinKeywords = 3;

/// Tolerant parse of a Description/Domain/Keywords reply. Missing sections
/// stay empty and raise a flag; a reply without any header becomes the
/// description.
inline ParsedReport parse_report_reply(std::string_view reply) {
  ParsedReport out;
  std::map<std::string, std::vector<std::string>> sections;
  std::string current;
  std::vector<std::string> preamble;
  for (const auto& line : text::split_lines(reply)) {
    std::string rest;
    const auto header = detail::section_header(line, rest);
    if (!header.empty()) {
      current = header;
      if (!rest.empty()) sections[current].push_back(rest);
      sections.try_emplace(current);
    } else if (!current.empty()) {
      if (!text::trim(line).empty()) sections[current].push_back(std::string(text::trim(line)));
    } else if (!text::trim(line).empty()) {
      preamble.push_back(std::string(text::trim(line)));
    }
  }
  if (sections.count("description")) {
    out.description = text::join(sections["description"], "\n");
  } else {
    out.flags.push_back("missing-description");
    if (sections.empty()) out.description = text::join(preamble, "\n");
  }
  if (sections.count("domain")) {
    out.domain = text::join(sections["domain"], " ");
  } else {
    out.flags.push_back("missing-domain");
  }
  if (sections.count("keywords")) {
    std::set<std::string> seen;
    std::string joined = text::join(sections["keywords"], ",");
    std::replace(joined.begin(), joined.end(), ';', ',');
    for (auto piece : text::split_lines(joined)) {
      std::string_view rest = piece;
      while (!rest.empty()) {
        const auto comma = rest.find(',');
        auto kw = std::string(text::trim(rest.substr(0, comma)));
        while (!kw.empty() && (kw.front() == '-' || kw.front() == '*')) kw = std::string(text::trim(kw.substr(1)));
        if (!kw.empty() && seen.insert(text::to_lower(kw)).second) out.keywords.push_back(kw);
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
      }
    }
    if (out.keywords.size() > kMaxKeywords) {
      out.keywords.resize(kMaxKeywords);
      out.flags.push_back("keywords-truncated");
    }
    if (out.keywords.size() < kMinKeywords) out.flags.push_back("few-keywords");
  } else {
    out.flags.push_back("missing-keywords");
  }
  return out;
}

inline nlohmann::json model_snapshot(const modelgw::Gateway& gateway) {
  const auto& c = gateway.config();
  return {{"chat", gateway.chat_identity()},
          {"embedder", gateway.embedder_identity()},
          {"temperature", c.temperature},
          {"max_new_tokens", c.max_new_tokens},
          {"context_budget_tokens", c.context_budget_tokens}};
}

inline std::string overarching_prompt(std::string_view summary) {
  std::string prompt(prompts::kOverarchingDescription);
  text::replace_all(prompt, prompts::kSupervisorPlaceholder, summary);
  prompt += prompts::kReportFormatSuffix;
  return prompt;
}

inline FileReport overarching_description(std::string_view summary, const modelgw::Gateway& gateway,
                                          const Clock& clock = system_clock()) {
  require(!text::trim(summary).empty(), ErrorCode::kPrecondition, "summary must be non-empty");
  const auto reply = gateway.chat(overarching_prompt(summary));
  auto parsed = parse_report_reply(reply);
  FileReport r;
  r.description = std::move(parsed.description);
  r.domain = std::move(parsed.domain);
  r.keywords = std::move(parsed.keywords);
  r.flags = std::move(parsed.flags);
  r.model_config_snapshot = model_snapshot(gateway);
  r.generated_at = clock();
  return r;
}

inline nlohmann::json to_json(const FileReport& r) {
  return {{"file_id", r.file_id},
          {"record_id", r.record_id},
          {"file_name", r.file_name},
          {"description", r.description},
          {"domain", r.domain},
          {"keywords", r.keywords},
          {"statistics_ref", r.statistics_ref},
          {"model_config_snapshot", r.model_config_snapshot},
          {"flags", r.flags},
          {"description_chars", r.description_chars()},
          {"description_tokens", r.description_tokens()},
          {"generated_at", r.generated_at}};
}

inline FileReport file_report_from_json(const nlohmann::json& j) {
  FileReport r;
  r.file_id = j.at("file_id").get<std::string>();
  r.record_id = j.value("record_id", std::string{});
  r.file_name = j.value("file_name", std::string{});
  r.description = j.at("description").get<std::string>();
  r.domain = j.value("domain", std::string{});
  r.keywords = j.value("keywords", std::vector<std::string>{});
  r.statistics_ref = j.value("statistics_ref", std::vector<std::string>{});
  r.model_config_snapshot = j.value("model_config_snapshot", nlohmann::json::object());
  r.flags = j.value("flags", std::vector<std::string>{});
  r.generated_at = j.value("generated_at", std::string{});
  return r;
}

// ---------------------------------------------------------------------------
// Record report

struct RecordReport {
  std::string record_id;
  std::string title;
  std::string user_description;
  std::string unified_summary;
  std::vector<std::string> file_reports;
  std::vector<std::string> flags;
  std::string generated_at;
};

/// Maps each file description to a short summary and reduces them into one.
/// A single file goes straight to the reduce step.
inline RecordReport record_report(const std::vector<FileReport>& file_reports, const modelgw::Gateway& gateway,
                                  const Clock& clock = system_clock()) {
  require(!file_reports.empty(), ErrorCode::kPrecondition, "record report needs at least one file report");
  RecordReport out;
  out.record_id = file_reports.front().record_id;
  for (const auto& f : file_reports) out.file_reports.push_back(f.file_id);
  std::vector<std::string> parts;
  if (file_reports.size() == 1) {
    parts.push_back(file_reports.front().description);
  } else {
    for (const auto& f : file_reports) {
      if (text::trim(f.description).empty()) continue;
      parts.push_back(gateway.chat(std::string(prompts::kSummarizeText) + f.description));
    }
    if (parts.empty()) parts.push_back({});
  }
  out.unified_summary = analyze::reduce_texts(parts, gateway, prompts::kReduceRecord);
  out.generated_at = clock();
  return out;
}

inline nlohmann::json to_json(const RecordReport& r) {
  return {{"record_id", r.record_id},
          {"title", r.title},
          {"user_description", r.user_description},
          {"unified_summary", r.unified_summary},
          {"file_reports", r.file_reports},
          {"flags", r.flags},
          {"generated_at", r.generated_at}};
}

inline RecordReport record_report_from_json(const nlohmann::json& j) {
  RecordReport r;
  r.record_id = j.at("record_id").get<std::string>();
  r.title = j.value("title", std::string{});
  r.user_description = j.value("user_description", std::string{});
  r.unified_summary = j.at("unified_summary").get<std::string>();
  r.file_reports = j.value("file_reports", std::vector<std::string>{});
  r.flags = j.value("flags", std::vector<std::string>{});
  r.generated_at = j.value("generated_at", std::string{});
  return r;
}

/// reports/{record_id}/{file_id}.json
inline void save_file_report(const std::filesystem::path& reports_dir, const FileReport& r) {
  fs::write_file_atomic(reports_dir / r.record_id / (r.file_id + ".json"), to_json(r).dump(2) + "\n");
}

/// reports/{record_id}/record.json
inline void save_record_report(const std::filesystem::path& reports_dir, const RecordReport& r) {
  fs::write_file_atomic(reports_dir / r.record_id / "record.json", to_json(r).dump(2) + "\n");
}

/// A record report with the file reports it lists.
struct RecordBundle {
  RecordReport record;
  std::vector<FileReport> files;
};

/// Loads every reports/{record_id}/ directory holding a record.json, sorted
/// by record id.
inline std::vector<RecordBundle> load_reports(const std::filesystem::path& reports_dir) {
  std::vector<RecordBundle> out;
  require(std::filesystem::is_directory(reports_dir), ErrorCode::kFileMissing,
          "no reports directory at " + reports_dir.string());
  for (const auto& dir : std::filesystem::directory_iterator(reports_dir)) {
    const auto record_file = dir.path() / "record.json";
    if (!dir.is_directory() || !std::filesystem::exists(record_file)) continue;
    RecordBundle b;
    b.record = record_report_from_json(nlohmann::json::parse(fs::read_file(record_file)));
    for (const auto& fid : b.record.file_reports) {
      const auto path = dir.path() / (fid + ".json");
      require(std::filesystem::exists(path), ErrorCode::kFileMissing, "missing file report " + path.string());
      b.files.push_back(file_report_from_json(nlohmann::json::parse(fs::read_file(path))));
    }
    out.push_back(std::move(b));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.record.record_id < b.record.record_id; });
  return out;
}

}  // namespace datascout::reports
