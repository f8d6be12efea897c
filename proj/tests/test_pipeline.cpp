// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "datascout/core/clock.hpp"
#include "datascout/core/fs.hpp"
#include "datascout/pipeline.hpp"
#include "datascout/service.hpp"
#include "harvest_support.hpp"

using namespace datascout;
using testsupport::TempDir;

namespace {

std::map<std::string, std::string> tree_contents(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[std::filesystem::relative(e.path(), root).generic_string()] = fs::read_file(e.path());
  }
  return out;
}

pipeline::RunSummary run_demo(const pipeline::Workspace& ws, std::size_t max_parallel) {
  http::FixtureTransport t(testsupport::community_fixture());
  harvester::Harvester h(testsupport::fixture_harvester_config(ws.state()), t);
  pipeline::RunOptions opts;
  opts.community_id = "demo";
  opts.page_size = 2;
  opts.max_parallel = max_parallel;
  opts.clock = fixed_clock("2026-01-01T00:00:00Z");
  return pipeline::run_all(ws, h, modelgw::Gateway::stub(), opts);
}

}  // namespace

TEST_CASE("Pipeline: end-to-end run over the fixture community", "[unit][pipeline]") {
  TempDir dir("pipe");
  const pipeline::Workspace ws{dir.path()};
  const auto s = run_demo(ws, 2);
  CHECK(s.harvest.allowed == std::vector<std::string>{"1001", "1002"});
  CHECK(s.harvest.disallowed == std::vector<std::string>{"1003", "1004"});
  CHECK(s.analyze.records == 2);
  CHECK(s.report.records == 2);
  CHECK(s.index_entries >= 2);
  CHECK(std::filesystem::exists(ws.index()));
  CHECK(std::filesystem::exists(ws.reports() / "1001" / "record.json"));
  CHECK(std::filesystem::exists(ws.reports() / "1002" / "record.json"));
  CHECK_FALSE(std::filesystem::exists(ws.reports() / "1003"));

  const auto catalog = service::Catalog::load(ws.index(), ws.reports());
  CHECK(catalog.record_ids() == std::vector<std::string>{"1001", "1002"});
  const auto& r = catalog.bundle("1001")->record;
  const auto hits = ragindex::query(catalog.index, ragindex::entry_text(r.unified_summary, r.user_description), 1,
                                    modelgw::Gateway::stub(), ragindex::LevelFilter::kRecord);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].record_id == "1001");
}

TEST_CASE("Pipeline: repeated runs produce byte-identical artifacts", "[property][pipeline]") {
  TempDir a("pipe-a");
  TempDir b("pipe-b");
  run_demo(pipeline::Workspace{a.path()}, 1);
  run_demo(pipeline::Workspace{b.path()}, 4);
  const auto ta = tree_contents(a.path());
  const auto tb = tree_contents(b.path());
  std::set<std::string> names_a, names_b;
  for (const auto& [k, v] : ta) names_a.insert(k);
  for (const auto& [k, v] : tb) names_b.insert(k);
  CHECK(names_a == names_b);
  for (const auto& [name, body] : ta) {
    if (name.rfind("state/", 0) == 0) continue;
    INFO(name);
    CHECK(tb.count(name) == 1);
    if (tb.count(name) == 1) CHECK(tb.at(name) == body);
  }
}

TEST_CASE("Pipeline: governance ledger shows no downloads for disallowed records", "[unit][pipeline]") {
  TempDir dir("pipe-gov");
  const pipeline::Workspace ws{dir.path()};
  run_demo(ws, 2);
  const auto ledger_path = ws.state() / harvester::kGovernanceLedger;
  REQUIRE(std::filesystem::exists(ledger_path));
  std::set<std::string> checked;
  std::size_t downloads = 0;
  for (const auto& line : text::split_lines(fs::read_file(ledger_path))) {
    if (text::trim(line).empty()) continue;
    const auto e = nlohmann::json::parse(line);
    const auto id = e.value("record_id", std::string{});
    if (e["event"] == "license-check") {
      checked.insert(id);
      CHECK(e["allowed"].get<bool>() == (id == "1001" || id == "1002"));
    }
    if (e["event"] == "download" || e["event"] == "publication") {
      ++downloads;
      CHECK(id != "1003");
      CHECK(id != "1004");
    }
  }
  CHECK(checked == std::set<std::string>{"1001", "1002", "1003", "1004"});
  CHECK(downloads > 0);
  CHECK_FALSE(std::filesystem::exists(ws.records() / "1003"));
  CHECK_FALSE(std::filesystem::exists(ws.records() / "1004"));
}

TEST_CASE("Pipeline: stages rerun from disk give the same reports", "[unit][pipeline]") {
  TempDir dir("pipe-stage");
  const pipeline::Workspace ws{dir.path()};
  run_demo(ws, 1);
  const auto before = tree_contents(ws.reports());
  TempDir again("pipe-stage2");
  const auto clock = fixed_clock("2026-01-01T00:00:00Z");
  analyze::AnalyzeOptions ao;
  ao.clock = clock;
  pipeline::analyze_records(ws.records(), again / "analysis", modelgw::Gateway::stub(), ao);
  pipeline::report_records(ws.records(), again / "analysis", again / "reports", again / "store", modelgw::Gateway::stub(),
                           clock);
  CHECK(tree_contents(again / "reports") == before);
}
