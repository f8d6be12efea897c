// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <string>
#include <vector>

#include "datascout/analyze/captions.hpp"
#include "datascout/analyze/correlation.hpp"
#include "datascout/analyze/kde.hpp"
#include "datascout/analyze/predictability.hpp"
#include "datascout/analyze/result.hpp"
#include "datascout/analyze/text_summary.hpp"
#include "datascout/analyze/words.hpp"
#include "datascout/core/clock.hpp"
#include "datascout/core/error.hpp"
#include "datascout/ingest/document.hpp"
#include "datascout/ingest/file_entry.hpp"
#include "datascout/ingest/tabular.hpp"
#include "datascout/modelgw.hpp"

namespace datascout::analyze {

struct AnalyzeOptions {
  Clock clock = system_clock();
  const ingest::TextExtractor* extractor = nullptr;  // null: default for the format
  std::size_t summary_window_tokens = 0;              // 0: derived from the context budget
  std::size_t max_predictability_targets = 20;
  std::size_t max_category_values = 1000;
  std::uint64_t seed = 42;
};

inline std::string error_note(std::string_view what, const Error& e) {
  return std::string(what) + ": " + std::string(to_string(e.code())) + ": " + e.what();
}

inline TabularPayload analyze_table(const ingest::CanonicalTable& table, const AnalyzeOptions& options,
                                    std::vector<std::string>& notes) {
  TabularPayload t;
  t.row_count = table.row_count;
  std::size_t numeric_columns = 0;
  for (const auto& c : table.columns) {
    std::size_t non_null = 0;
    for (const auto& v : c.values) non_null += v.has_value();
    t.features.push_back({c.name, c.kind, non_null});
    if (ingest::is_numeric(c.kind)) {
      ++numeric_columns;
      try {
        t.kde.push_back(kde_fit(c.finite_numbers(), std::nullopt, c.name));
      } catch (const Error& e) {
        notes.push_back(error_note("kde skipped for " + c.name, e));
      }
    } else {
      auto freq = category_frequencies(c);
      if (freq.counts.size() > options.max_category_values) freq.counts.resize(options.max_category_values);
      t.categories.push_back(std::move(freq));
    }
  }
  if (numeric_columns >= 2) {
    t.correlations = feature_correlations(table);
  } else {
    notes.push_back("correlations skipped: fewer than two numeric columns");
  }
  std::size_t targets = 0;
  for (const auto& c : table.columns) {
    if (targets >= options.max_predictability_targets) break;
    if (!ingest::is_numeric(c.kind) && c.kind != ingest::FeatureKind::kCategorical) continue;
    ++targets;
    try {
      t.predictability.push_back(feature_predictability(table, c.name, options.seed));
    } catch (const Error& e) {
      notes.push_back(error_note("predictability skipped for " + c.name, e));
    }
  }
  return t;
}

inline TextPayload analyze_text(const ingest::TextDocument& doc, const modelgw::Gateway& gateway,
                                const AnalyzeOptions& options, std::vector<std::string>& notes) {
  TextPayload x;
  x.token_count = doc.token_count;
  x.words = word_distribution(doc);
  auto summary = summarize_text(doc, gateway, options.summary_window_tokens);
  x.summary = std::move(summary.text);
  x.summary_available = summary.available;
  if (!summary.available) notes.push_back(summary.note);
  return x;
}

inline AnalyzerResult make_result(const ingest::FileEntry& entry, Modality modality, const AnalyzeOptions& options) {
  AnalyzerResult r;
  r.file_id = entry.file_id;
  r.record_id = entry.record_id;
  r.file_name = entry.name;
  r.modality = modality;
  r.produced_at = options.clock();
  return r;
}

/// Runs the analyzers matching the file's modality.
inline AnalyzerResult analyze_file(const ingest::FileEntry& entry, const modelgw::Gateway& gateway,
                                   const AnalyzeOptions& options = {}) {
  if (ingest::is_tabular(entry.format)) {
    auto r = make_result(entry, Modality::kTabular, options);
    r.payload = analyze_table(ingest::load_tabular(entry.path), options, r.notes);
    return r;
  }
  if (ingest::is_textual(entry.format)) {
    auto r = make_result(entry, Modality::kText, options);
    const auto& extractor = options.extractor ? *options.extractor : ingest::default_extractor(entry.format);
    try {
      const auto doc = ingest::extract_document_text(entry.path, extractor, entry.file_id);
      r.payload = analyze_text(doc, gateway, options, r.notes);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kExtractionFailure && e.code() != ErrorCode::kFileMissing) throw;
      TextPayload empty;
      empty.summary_available = false;
      r.payload = empty;
      r.notes.push_back(error_note("skipped", e));
    }
    return r;
  }
  if (ingest::is_image(entry.format)) {
    auto r = make_result(entry, Modality::kImage, options);
    ImagePayload m;
    m.total_images = 1;
    m.image_names = {entry.name};
    m.captions = caption_images({entry.path}, gateway, options.seed);
    r.payload = std::move(m);
    return r;
  }
  fail(ErrorCode::kUnsupportedFormat, entry.name + " has no analyzer");
}

/// Analyzes every supported file of a record. Image files beyond the caption
/// cap are sampled; the rest get a result without captions and a note.
/// Unsupported files are skipped and listed in `skipped`.
inline std::vector<AnalyzerResult> analyze_record_files(const std::vector<ingest::FileEntry>& entries,
                                                        const modelgw::Gateway& gateway,
                                                        const AnalyzeOptions& options,
                                                        std::vector<std::string>* skipped = nullptr) {
  std::vector<std::size_t> image_positions;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (ingest::is_image(entries[i].format)) image_positions.push_back(i);
  }
  std::vector<bool> caption_this(entries.size(), true);
  if (image_positions.size() > kMaxCaptionedImages) {
    for (auto p : image_positions) caption_this[p] = false;
    for (auto k : sample_image_indices(image_positions.size(), kMaxCaptionedImages, options.seed)) {
      caption_this[image_positions[k]] = true;
    }
  }
  std::vector<AnalyzerResult> out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (e.format == ingest::FileFormat::kUnsupported) {
      if (skipped) skipped->push_back(e.name);
      continue;
    }
    if (ingest::is_image(e.format) && !caption_this[i]) {
      auto r = make_result(e, Modality::kImage, options);
      r.payload = ImagePayload{1, {e.name}, {}};
      r.notes.push_back("not sampled for captioning");
      out.push_back(std::move(r));
      continue;
    }
    try {
      out.push_back(analyze_file(e, gateway, options));
    } catch (const Error& err) {
      if (err.code() != ErrorCode::kParseError) throw;
      if (skipped) skipped->push_back(e.name + ": " + err.what());
    }
  }
  return out;
}

}  // namespace datascout::analyze
