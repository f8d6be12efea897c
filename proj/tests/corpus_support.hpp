// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

#include "datascout/core/clock.hpp"
#include "datascout/core/fs.hpp"
#include "datascout/modelgw.hpp"
#include "datascout/ragindex.hpp"
#include "datascout/reports.hpp"

namespace testsupport {

/// The 50-record description corpus as record bundles without file reports.
inline std::vector<datascout::reports::RecordBundle> reports50(const std::filesystem::path& fixtures_dir) {
  const auto j = nlohmann::json::parse(datascout::fs::read_file(fixtures_dir / "reports50.json"));
  std::vector<datascout::reports::RecordBundle> out;
  for (const auto& r : j) {
    datascout::reports::RecordBundle b;
    b.record.record_id = r.at("record_id").get<std::string>();
    b.record.title = r.at("title").get<std::string>();
    b.record.unified_summary = r.at("unified_summary").get<std::string>();
    b.record.user_description = r.at("user_description").get<std::string>();
    b.record.generated_at = "2026-01-01T00:00:00Z";
    out.push_back(std::move(b));
  }
  return out;
}

/// Writes the bundles as a reports directory tree.
inline void write_reports(const std::vector<datascout::reports::RecordBundle>& bundles,
                          const std::filesystem::path& reports_dir) {
  for (const auto& b : bundles) {
    for (const auto& f : b.files) datascout::reports::save_file_report(reports_dir, f);
    datascout::reports::save_record_report(reports_dir, b.record);
  }
}

/// Reports directory plus saved index for the 50-record corpus.
struct Corpus {
  std::filesystem::path reports_dir;
  std::filesystem::path index_path;
  std::vector<datascout::reports::RecordBundle> bundles;
};

inline Corpus make_corpus(const std::filesystem::path& fixtures_dir, const std::filesystem::path& root) {
  Corpus c{root / "reports", root / "index.dsix", reports50(fixtures_dir)};
  write_reports(c.bundles, c.reports_dir);
  datascout::ragindex::BuildOptions opts;
  opts.clock = datascout::fixed_clock("2026-01-01T00:00:00Z");
  datascout::ragindex::save_index(
      datascout::ragindex::build_index(c.bundles, datascout::modelgw::Gateway::stub(), opts), c.index_path);
  return c;
}

}  // namespace testsupport
