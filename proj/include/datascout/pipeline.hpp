// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "datascout/analyze/analyze_file.hpp"
#include "datascout/analyze/result.hpp"
#include "datascout/core/clock.hpp"
#include "datascout/core/error.hpp"
#include "datascout/core/fs.hpp"
#include "datascout/harvester.hpp"
#include "datascout/ingest/file_entry.hpp"
#include "datascout/modelgw.hpp"
#include "datascout/ragindex.hpp"
#include "datascout/reports.hpp"

namespace datascout::pipeline {

/// Workspace layout:
///   state/      manifest and governance ledger
///   records/    {record_id}/ downloaded files, {record_id}.meta.json metadata
///   analysis/   {record_id}/ analyzer results
///   store/      content-addressed analysis payloads
///   reports/    {record_id}/ file and record reports
///   index.dsix  retrieval index
struct Workspace {
  std::filesystem::path root;

  std::filesystem::path state() const { return root / "state"; }
  std::filesystem::path records() const { return root / "records"; }
  std::filesystem::path analysis() const { return root / "analysis"; }
  std::filesystem::path store() const { return root / "store"; }
  std::filesystem::path reports() const { return root / "reports"; }
  std::filesystem::path index() const { return root / "index.dsix"; }
};

inline std::filesystem::path meta_path(const std::filesystem::path& records_dir, const std::string& record_id) {
  return records_dir / (record_id + ".meta.json");
}

inline std::optional<harvester::RecordMeta> load_record_meta(const std::filesystem::path& records_dir,
                                                             const std::string& record_id) {
  const auto path = meta_path(records_dir, record_id);
  if (!std::filesystem::exists(path)) return std::nullopt;
  return harvester::record_from_json(nlohmann::json::parse(fs::read_file(path)));
}

/// Record directories under `records_dir`, sorted by name.
inline std::vector<std::string> record_dirs(const std::filesystem::path& records_dir) {
  require(std::filesystem::is_directory(records_dir), ErrorCode::kFileMissing,
          "no records directory at " + records_dir.string());
  std::vector<std::string> out;
  for (const auto& d : std::filesystem::directory_iterator(records_dir)) {
    if (d.is_directory()) out.push_back(d.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------

struct HarvestSummary {
  std::size_t records = 0;
  std::vector<std::string> allowed;
  std::vector<std::string> disallowed;
  std::size_t files_downloaded = 0;
  std::size_t publications = 0;
  std::vector<std::string> failures;
};

inline nlohmann::json to_json(const HarvestSummary& s) {
  return {{"records", s.records},
          {"allowed", s.allowed},
          {"disallowed", s.disallowed},
          {"files_downloaded", s.files_downloaded},
          {"publications", s.publications},
          {"failures", s.failures}};
}

/// Lists the community, gates each record on its license and downloads
/// files and linked publications of allowed records. Per-record download
/// failures are collected, not fatal.
inline HarvestSummary harvest(harvester::Harvester& h, const std::string& community_id,
                              const std::filesystem::path& records_dir,
                              std::size_t page_size = harvester::kDefaultPageSize, std::size_t max_parallel = 1) {
  HarvestSummary s;
  const auto records = h.fetch_community_records(community_id, page_size);
  s.records = records.size();
  std::filesystem::create_directories(records_dir);
  for (const auto& r : records) {
    if (!h.check_license(r).allowed) {
      s.disallowed.push_back(r.record_id);
      continue;
    }
    s.allowed.push_back(r.record_id);
    try {
      s.files_downloaded += h.download_record_files(r, records_dir, max_parallel).size();
      if (h.resolve_publication(r, records_dir).source != harvester::PublicationSource::kNone) ++s.publications;
      fs::write_file_atomic(meta_path(records_dir, r.record_id), harvester::to_json(r).dump(2) + "\n");
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kChecksumMismatch && e.code() != ErrorCode::kTransportFailure &&
          e.code() != ErrorCode::kMalformedResponse) {
        throw;
      }
      s.failures.push_back(r.record_id + ": " + e.what());
    }
  }
  return s;
}

// ---------------------------------------------------------------------------

/// Files of one record directory in name order.
inline std::vector<ingest::FileEntry> record_files(const std::filesystem::path& record_dir, const std::string& record_id) {
  std::vector<std::filesystem::path> paths;
  for (const auto& f : std::filesystem::directory_iterator(record_dir)) {
    if (f.is_regular_file()) paths.push_back(f.path());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<ingest::FileEntry> out;
  for (const auto& p : paths) out.push_back(ingest::FileEntry::from_path(record_id, p));
  return out;
}

struct AnalyzeSummary {
  std::size_t records = 0;
  std::size_t results = 0;
  std::vector<std::string> skipped;
};

inline nlohmann::json to_json(const AnalyzeSummary& s) {
  return {{"records", s.records}, {"results", s.results}, {"skipped", s.skipped}};
}

/// analysis_dir/{record_id}/{file_id}.json (+ .bin) for every supported file.
inline AnalyzeSummary analyze_records(const std::filesystem::path& records_dir, const std::filesystem::path& analysis_dir,
                                      const modelgw::Gateway& gateway, const analyze::AnalyzeOptions& options = {}) {
  AnalyzeSummary s;
  for (const auto& rid : record_dirs(records_dir)) {
    std::vector<std::string> skipped;
    const auto results = analyze::analyze_record_files(record_files(records_dir / rid, rid), gateway, options, &skipped);
    const auto out_dir = analysis_dir / rid;
    std::filesystem::create_directories(out_dir);
    for (const auto& r : results) analyze::save_result(r, out_dir);
    for (auto& name : skipped) s.skipped.push_back(rid + "/" + name);
    s.results += results.size();
    ++s.records;
  }
  return s;
}

/// Analyzer results of one record, in file name order.
inline std::vector<analyze::AnalyzerResult> load_record_results(const std::filesystem::path& dir) {
  std::vector<analyze::AnalyzerResult> out;
  if (!std::filesystem::is_directory(dir)) return out;
  for (const auto& f : std::filesystem::directory_iterator(dir)) {
    if (f.path().extension() == ".json") out.push_back(analyze::load_result(f.path()));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.file_name != b.file_name ? a.file_name < b.file_name : a.file_id < b.file_id;
  });
  return out;
}

// ---------------------------------------------------------------------------

/// One file report from one analyzer result: stores the payload, summarizes
/// it and asks for the overarching description.
inline reports::FileReport file_report(const analyze::AnalyzerResult& result, const reports::ContentStore& store,
                                       const modelgw::Gateway& gateway, const Clock& clock) {
  const auto hash = reports::store_analysis(store, result);
  const auto summary = reports::data_content_summary({result}, gateway);
  auto fr = reports::overarching_description(summary.text, gateway, clock);
  fr.file_id = result.file_id;
  fr.record_id = result.record_id;
  fr.file_name = result.file_name;
  fr.statistics_ref = {hash};
  if (summary.partial) fr.flags.push_back("partial-summary");
  return fr;
}

struct ReportSummary {
  std::size_t records = 0;
  std::size_t file_reports = 0;
  std::vector<std::string> empty_records;
};

inline nlohmann::json to_json(const ReportSummary& s) {
  return {{"records", s.records}, {"file_reports", s.file_reports}, {"empty_records", s.empty_records}};
}

/// File reports for every analyzed file and one record report per record.
/// Titles and user descriptions come from the harvested metadata.
inline ReportSummary report_records(const std::filesystem::path& records_dir, const std::filesystem::path& analysis_dir,
                                    const std::filesystem::path& reports_dir, const std::filesystem::path& store_dir,
                                    const modelgw::Gateway& gateway, const Clock& clock = system_clock()) {
  ReportSummary s;
  const reports::ContentStore store(store_dir);
  for (const auto& rid : record_dirs(records_dir)) {
    const auto results = load_record_results(analysis_dir / rid);
    if (results.empty()) {
      s.empty_records.push_back(rid);
      continue;
    }
    std::vector<reports::FileReport> file_reports;
    for (const auto& r : results) {
      file_reports.push_back(file_report(r, store, gateway, clock));
      reports::save_file_report(reports_dir, file_reports.back());
    }
    auto rr = reports::record_report(file_reports, gateway, clock);
    if (const auto meta = load_record_meta(records_dir, rid)) {
      rr.title = meta->title;
      rr.user_description = meta->user_description;
    }
    reports::save_record_report(reports_dir, rr);
    s.file_reports += file_reports.size();
    ++s.records;
  }
  return s;
}

// ---------------------------------------------------------------------------

inline ragindex::VectorIndex index_reports(const std::filesystem::path& reports_dir, const std::filesystem::path& out,
                                           const modelgw::Gateway& gateway, const ragindex::BuildOptions& options = {}) {
  auto index = ragindex::build_index(reports::load_reports(reports_dir), gateway, options);
  ragindex::save_index(index, out);
  return index;
}

struct RunSummary {
  HarvestSummary harvest;
  AnalyzeSummary analyze;
  ReportSummary report;
  std::size_t index_entries = 0;
};

inline nlohmann::json to_json(const RunSummary& s) {
  return {{"harvest", to_json(s.harvest)},
          {"analyze", to_json(s.analyze)},
          {"report", to_json(s.report)},
          {"index_entries", s.index_entries}};
}

struct RunOptions {
  std::string community_id;
  std::size_t page_size = harvester::kDefaultPageSize;
  std::size_t max_parallel = 1;
  analyze::AnalyzeOptions analyze;
  ragindex::BuildOptions index;
  Clock clock = system_clock();
};

/// harvest -> analyze -> report -> index inside one workspace. The
/// harvester's state directory should be ws.state().
inline RunSummary run_all(const Workspace& ws, harvester::Harvester& h, const modelgw::Gateway& gateway,
                          RunOptions options) {
  options.analyze.clock = options.clock;
  options.index.clock = options.clock;
  RunSummary s;
  s.harvest = harvest(h, options.community_id, ws.records(), options.page_size, options.max_parallel);
  s.analyze = analyze_records(ws.records(), ws.analysis(), gateway, options.analyze);
  s.report = report_records(ws.records(), ws.analysis(), ws.reports(), ws.store(), gateway, options.clock);
  s.index_entries = index_reports(ws.reports(), ws.index(), gateway, options.index).size();
  return s;
}

}  // namespace datascout::pipeline
