// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <csignal>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "datascout/core/error.hpp"
#include "datascout/core/fs.hpp"
#include "datascout/core/http.hpp"
#include "datascout/core/text.hpp"
#include "datascout/evalsuite.hpp"
#include "datascout/harvester.hpp"
#include "datascout/ingest/document.hpp"
#include "datascout/ingest/tabular.hpp"
#include "datascout/layout.hpp"
#include "datascout/modelgw.hpp"
#include "datascout/pipeline.hpp"
#include "datascout/ragindex.hpp"
#include "datascout/reports.hpp"
#include "datascout/server.hpp"
#include "datascout/service.hpp"
#include "datascout/synthgen.hpp"

namespace datascout::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUser = 1;
inline constexpr int kExitInternal = 2;

/// Errors caused by bad input rather than by the program or its services.
inline bool is_user_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kInvalidInput:
    case ErrorCode::kPrecondition:
    case ErrorCode::kFileMissing:
    case ErrorCode::kParseError:
    case ErrorCode::kUnsupportedFormat:
    case ErrorCode::kVersionMismatch:
    case ErrorCode::kEmptyIndex:
    case ErrorCode::kGovernanceViolation:
    case ErrorCode::kMissingProfile:
    case ErrorCode::kInsufficientData:
    case ErrorCode::kPortInUse:
    case ErrorCode::kMissingIndex:
    case ErrorCode::kDatasetNotFound:
    case ErrorCode::kEmptyInput:
    case ErrorCode::kTooFewEntries:
      return true;
    default:
      return false;
  }
}

/// Optional JSON configuration: {"gateway": {...}, "harvester": {...}}.
struct Settings {
  nlohmann::json doc = nlohmann::json::object();

  static Settings load(const std::string& path) {
    Settings s;
    if (path.empty()) return s;
    s.doc = nlohmann::json::parse(fs::read_file(path), nullptr, false);
    require(!s.doc.is_discarded() && s.doc.is_object(), ErrorCode::kParseError, "config " + path + " is not a JSON object");
    return s;
  }

  /// Remote gateway when a chat endpoint is configured, else the stub.
  modelgw::Gateway gateway() const {
    const auto cfg = modelgw::GatewayConfig::from_json(doc.value("gateway", nlohmann::json::object()));
    if (cfg.chat_endpoint.empty()) return modelgw::Gateway::stub(cfg);
    return modelgw::Gateway::remote(cfg, std::make_shared<http::NetworkTransport>());
  }

  harvester::HarvesterConfig harvester() const {
    return harvester::HarvesterConfig::from_json(doc.value("harvester", nlohmann::json::object()));
  }
};

namespace detail {

inline void write_or_print(const std::string& path, const std::string& body, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << body;
  } else {
    fs::write_file_atomic(path, body);
  }
}

inline std::filesystem::path sibling(const std::filesystem::path& dir, const std::string& name) {
  auto p = dir;
  while (!p.empty() && p.filename().empty()) p = p.parent_path();
  return p.parent_path() / name;
}

inline std::string fixed(double v, int digits = 4) { return text::format_fixed(v, digits); }

/// Resolves `p` against `base` unless absolute.
inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Subcommand bodies. Each returns the exit code and shares its code path with
// the library or the HTTP service.

inline int cmd_query(const service::Catalog& catalog, const modelgw::Gateway& gateway, const std::string& q,
                     std::size_t k, bool json, std::ostream& out) {
  const auto resp = service::query_response(catalog, gateway, q, k);
  if (json) {
    out << resp.dump(2) << "\n";
    return kExitOk;
  }
  out << "rank\tscore\trecord_id\ttitle\n";
  std::size_t rank = 1;
  for (const auto& r : resp["results"]) {
    out << rank++ << "\t" << detail::fixed(r["score"].get<double>()) << "\t" << r["record_id"].get<std::string>() << "\t"
        << r["title"].get<std::string>() << "\n";
  }
  return kExitOk;
}

struct SynthReport {
  std::string mode;
  std::size_t rows = 0;
  std::vector<synthgen::AttemptLog> attempts;
  std::vector<evalsuite::OverlapScore> overlaps;
};

inline nlohmann::json to_json(const SynthReport& r) {
  nlohmann::json attempts = nlohmann::json::array();
  for (const auto& a : r.attempts) attempts.push_back(synthgen::to_json(a));
  nlohmann::json overlaps = nlohmann::json::array();
  for (const auto& o : r.overlaps) overlaps.push_back({{"feature", o.feature_name}, {"percent", o.percent}, {"bins", o.bins}});
  return {{"mode", r.mode}, {"rows", r.rows}, {"attempts", attempts}, {"overlaps", overlaps}};
}

/// Task file fields (paths relative to the task file):
///   subject, source (CSV/XML), mode ("agent" | "kde" | "examples-only"),
///   use_stats (agent only, default true), analysis (optional stored analyzer
///   result supplying the statistics), n_samples, max_retries, seed,
///   output_path, scratch_dir, runtime, timeout_s, bins.
inline SynthReport run_synth_task(const std::filesystem::path& task_file, const modelgw::Gateway& gateway) {
  const auto j = nlohmann::json::parse(fs::read_file(task_file), nullptr, false);
  require(!j.is_discarded() && j.is_object(), ErrorCode::kParseError, "task file is not a JSON object");
  const auto base = task_file.parent_path();
  require(j.contains("source") && j.contains("output_path"), ErrorCode::kInvalidArgument,
          "task needs source and output_path");
  const auto source = ingest::load_tabular(detail::resolve(base, j["source"].get<std::string>()));
  const std::string mode = j.value("mode", std::string("agent"));
  const auto n = j.value("n_samples", synthgen::kDefaultSamples);
  const auto seed = j.value("seed", synthgen::kGenerationSeed);
  const auto output = detail::resolve(base, j["output_path"].get<std::string>());
  const auto bins = j.value("bins", evalsuite::kDefaultOverlapBins);
  const auto profiles = j.contains("analysis")
                            ? synthgen::profiles_from_result(analyze::load_result(detail::resolve(base, j["analysis"])))
                            : synthgen::profiles_from_table(source);
  const auto examples = synthgen::select_examples(source, synthgen::kExampleRows, seed);

  SynthReport report;
  report.mode = mode;
  ingest::CanonicalTable produced;
  if (mode == "kde") {
    produced = synthgen::kde_sampler(profiles, n, seed);
    fs::write_file_atomic(output, ingest::to_csv(produced));
  } else if (mode == "examples-only") {
    produced = synthgen::examples_only_sampler(examples, n, seed);
    fs::write_file_atomic(output, ingest::to_csv(produced));
  } else if (mode == "agent") {
    synthgen::GenerationTask task;
    task.subject = j.value("subject", task_file.stem().string());
    task.examples = synthgen::examples_text(examples);
    if (j.value("use_stats", true)) task.metadata_stats = synthgen::render_metadata_stats(profiles);
    task.output_path = output;
    task.n_samples = n;
    task.max_retries = j.value("max_retries", synthgen::kDefaultMaxRetries);
    synthgen::ProcessSandboxConfig sc;
    sc.runtime = j.value("runtime", sc.runtime);
    sc.timeout = std::chrono::seconds(j.value("timeout_s", static_cast<long>(sc.timeout.count())));
    synthgen::ProcessSandbox sandbox(sc);
    const auto scratch = j.contains("scratch_dir") ? detail::resolve(base, j["scratch_dir"].get<std::string>())
                                                   : std::filesystem::path(output.string() + ".scratch");
    auto outcome = synthgen::run_generation_agent(task, gateway, sandbox, scratch);
    produced = std::move(outcome.table);
    report.attempts = std::move(outcome.attempts);
  } else {
    fail(ErrorCode::kInvalidArgument, "unknown synth mode " + mode);
  }
  report.rows = produced.row_count;
  report.overlaps = synthgen::feature_overlaps(source, produced, bins);
  return report;
}

inline std::vector<evalsuite::RedundancyPair> redundancy_pairs(const std::filesystem::path& reports_dir,
                                                               const std::filesystem::path& records_dir) {
  std::vector<evalsuite::RedundancyPair> pairs;
  for (const auto& b : reports::load_reports(reports_dir)) {
    std::string paper;
    for (const auto* name : {"publication.pdf", "publication.html", "publication.txt"}) {
      const auto path = records_dir / b.record.record_id / name;
      if (!std::filesystem::exists(path)) continue;
      try {
        const auto fmt = ingest::detect_format(path);
        paper = ingest::extract_document_text(path, ingest::default_extractor(fmt), b.record.record_id).body;
      } catch (const Error&) {
        paper.clear();
      }
      if (!paper.empty()) break;
    }
    pairs.push_back({b.record.unified_summary, paper});
  }
  return pairs;
}

inline evalsuite::LengthStats length_stats_for(const std::filesystem::path& reports_dir) {
  std::vector<std::string> generated, originals;
  for (const auto& b : reports::load_reports(reports_dir)) {
    generated.push_back(b.record.unified_summary);
    if (!text::trim(b.record.user_description).empty()) originals.push_back(b.record.user_description);
  }
  return evalsuite::description_length_stats(generated, originals);
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"datascout: harvest, analyze, report on, index and search research datasets"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON configuration file");

  // harvest
  auto* harvest = app.add_subcommand("harvest", "List a community and download allowed records");
  std::string community, ws_dir, fixtures;
  std::size_t page_size = harvester::kDefaultPageSize, max_parallel = 1;
  harvest->add_option("--community", community, "Community id")->required();
  harvest->add_option("--out", ws_dir, "Workspace directory")->default_val("workspace");
  harvest->add_option("--page-size", page_size)->check(CLI::PositiveNumber);
  harvest->add_option("--max-parallel", max_parallel)->check(CLI::PositiveNumber);
  harvest->add_option("--fixtures", fixtures, "Serve repository requests from a fixture directory");

  // run (whole pipeline)
  auto* runall = app.add_subcommand("run", "harvest, analyze, report and index in one workspace");
  runall->add_option("--community", community, "Community id")->required();
  runall->add_option("--out", ws_dir, "Workspace directory")->default_val("workspace");
  runall->add_option("--fixtures", fixtures, "Serve repository requests from a fixture directory");
  runall->add_option("--max-parallel", max_parallel)->check(CLI::PositiveNumber);

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "Analyze every record directory");
  std::string records_dir, analysis_dir, reports_dir, store_dir, out_path;
  analyze_cmd->add_option("--records", records_dir, "Records directory")->required();
  analyze_cmd->add_option("--out", analysis_dir, "Analysis directory (default: ../analysis)");

  // report
  auto* report = app.add_subcommand("report", "Generate file and record reports");
  report->add_option("--records", records_dir, "Records directory")->required();
  report->add_option("--analysis", analysis_dir, "Analysis directory (default: ../analysis)");
  report->add_option("--out", reports_dir, "Reports directory (default: ../reports)");
  report->add_option("--store", store_dir, "Content store (default: ../store)");

  // index
  auto* index_cmd = app.add_subcommand("index", "Build the retrieval index from reports");
  bool record_only = false;
  index_cmd->add_option("--reports", reports_dir, "Reports directory")->required();
  index_cmd->add_option("--out", out_path, "Index file")->required();
  index_cmd->add_flag("--record-only", record_only, "Skip file-level entries");

  // query
  auto* query = app.add_subcommand("query", "Search the index");
  std::string index_path, q;
  std::size_t k = service::kDefaultK;
  bool as_json = false;
  query->add_option("--index", index_path, "Index file")->required();
  query->add_option("--q", q, "Query text")->required();
  query->add_option("--k", k)->check(CLI::PositiveNumber);
  query->add_option("--reports", reports_dir, "Reports directory for titles and snippets");
  query->add_flag("--json", as_json, "Print the full JSON response");

  // graph
  auto* graph = app.add_subcommand("graph", "Lay out the query graph");
  std::string svg_path, graph_json_path;
  graph->add_option("--index", index_path, "Index file")->required();
  graph->add_option("--q", q, "Query text")->required();
  graph->add_option("--svg", svg_path, "SVG output")->required();
  graph->add_option("--json", graph_json_path, "Layout JSON output");

  // questions
  auto* questions = app.add_subcommand("questions", "Generate retrieval questions from record summaries");
  std::size_t n_questions = evalsuite::kDefaultQuestionCount;
  questions->add_option("--reports", reports_dir, "Reports directory")->required();
  questions->add_option("--out", out_path, "Question file")->required();
  questions->add_option("--n", n_questions, "Questions per record")->check(CLI::PositiveNumber);

  // eval-retrieval
  auto* eval_retrieval = app.add_subcommand("eval-retrieval", "Top-k accuracy and entropy of generated questions");
  std::string questions_path, curve_path;
  bool include_files = false;
  eval_retrieval->add_option("--index", index_path, "Index file")->required();
  eval_retrieval->add_option("--questions", questions_path, "Question file")->required();
  eval_retrieval->add_option("--out", out_path, "Metrics JSON (default: stdout)");
  eval_retrieval->add_option("--curve", curve_path, "Entropy curve CSV");
  eval_retrieval->add_flag("--include-files", include_files, "Count file entries for their record");

  // eval-redundancy
  auto* eval_redundancy = app.add_subcommand("eval-redundancy", "Similarity of generated summaries to publications");
  eval_redundancy->add_option("--reports", reports_dir, "Reports directory")->required();
  eval_redundancy->add_option("--records", records_dir, "Records directory")->required();
  eval_redundancy->add_option("--out", out_path, "Result JSON (default: stdout)");

  // eval-lengths
  auto* eval_lengths = app.add_subcommand("eval-lengths", "Length of generated versus original descriptions");
  std::string series_path;
  eval_lengths->add_option("--reports", reports_dir, "Reports directory")->required();
  eval_lengths->add_option("--out", out_path, "Statistics JSON (default: stdout)");
  eval_lengths->add_option("--series", series_path, "Per-description CSV");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate synthetic rows and score them");
  std::string task_path;
  synth->add_option("--task", task_path, "Task JSON file")->required();
  synth->add_option("--out", out_path, "Report JSON (default: stdout)");

  // serve
  auto* serve = app.add_subcommand("serve", "Serve the JSON API");
  int port = 0;
  serve->add_option("--index", index_path, "Index file")->required();
  serve->add_option("--reports", reports_dir, "Reports directory");
  serve->add_option("--port", port, "Port (default: DATASCOUT_PORT or 8080)")->check(CLI::Range(1, 65535));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUser;
  }

  try {
    const auto settings = Settings::load(config_path);
    const auto gateway = settings.gateway();
    auto optional_reports = [&]() -> std::optional<std::filesystem::path> {
      if (reports_dir.empty()) return std::nullopt;
      return std::filesystem::path(reports_dir);
    };

    if (*harvest || *runall) {
      auto hc = settings.harvester();
      const pipeline::Workspace ws{ws_dir};
      hc.state_dir = ws.state();
      std::unique_ptr<http::Transport> transport;
      if (fixtures.empty()) {
        transport = std::make_unique<http::NetworkTransport>();
      } else {
        transport = std::make_unique<http::FixtureTransport>(fixtures);
      }
      harvester::Harvester h(hc, *transport);
      if (*harvest) {
        const auto s = pipeline::harvest(h, community, ws.records(), page_size, max_parallel);
        out << pipeline::to_json(s).dump(2) << "\n";
      } else {
        pipeline::RunOptions ro;
        ro.community_id = community;
        ro.max_parallel = max_parallel;
        const auto s = pipeline::run_all(ws, h, gateway, ro);
        out << pipeline::to_json(s).dump(2) << "\n";
      }
      return kExitOk;
    }
    if (*analyze_cmd) {
      if (analysis_dir.empty()) analysis_dir = detail::sibling(records_dir, "analysis").string();
      const auto s = pipeline::analyze_records(records_dir, analysis_dir, gateway);
      out << pipeline::to_json(s).dump(2) << "\n";
      return kExitOk;
    }
    if (*report) {
      if (analysis_dir.empty()) analysis_dir = detail::sibling(records_dir, "analysis").string();
      if (reports_dir.empty()) reports_dir = detail::sibling(records_dir, "reports").string();
      if (store_dir.empty()) store_dir = detail::sibling(records_dir, "store").string();
      const auto s = pipeline::report_records(records_dir, analysis_dir, reports_dir, store_dir, gateway);
      out << pipeline::to_json(s).dump(2) << "\n";
      return kExitOk;
    }
    if (*index_cmd) {
      ragindex::BuildOptions bo;
      bo.include_files = !record_only;
      const auto index = pipeline::index_reports(reports_dir, out_path, gateway, bo);
      out << "indexed " << index.size() << " entries into " << out_path << "\n";
      return kExitOk;
    }
    if (*query) {
      const auto catalog = service::Catalog::load(index_path, optional_reports());
      return cmd_query(catalog, gateway, q, k, as_json, out);
    }
    if (*graph) {
      const auto catalog = service::Catalog::load(index_path, std::nullopt);
      layout::GraphOptions options;
      options.max_nodes = service::kGraphNodeCap;
      const auto g = layout::build_graph(catalog.index, service::embed_query(catalog, q, gateway), options);
      const auto positions = layout::fr_layout(g);
      fs::write_file_atomic(svg_path, layout::render_svg(g, positions));
      if (!graph_json_path.empty()) fs::write_file_atomic(graph_json_path, layout::layout_json(g, positions).dump(2) + "\n");
      out << "wrote " << svg_path << " with " << g.nodes.size() << " nodes and " << g.edges.size() << " edges\n";
      return kExitOk;
    }
    if (*questions) {
      std::vector<evalsuite::RetrievalQuestion> all;
      std::size_t short_sets = 0;
      for (const auto& b : reports::load_reports(reports_dir)) {
        if (text::trim(b.record.unified_summary).empty()) continue;
        auto set = evalsuite::generate_questions(b.record.unified_summary, gateway, b.record.record_id, n_questions);
        short_sets += set.under_count;
        for (auto& x : set.questions) all.push_back(std::move(x));
      }
      fs::write_file_atomic(out_path, evalsuite::questions_to_json(all).dump(2) + "\n");
      out << "wrote " << all.size() << " questions to " << out_path;
      if (short_sets > 0) out << " (" << short_sets << " records returned fewer than requested)";
      out << "\n";
      return kExitOk;
    }
    if (*eval_retrieval) {
      const auto index = ragindex::load_index(index_path);
      const auto qs = evalsuite::questions_from_json(nlohmann::json::parse(fs::read_file(questions_path)));
      evalsuite::RetrievalOptions ro;
      ro.include_file_entries = include_files;
      const auto m = evalsuite::retrieval_experiment(qs, index, gateway, ro);
      detail::write_or_print(out_path, evalsuite::to_json(m).dump(2) + "\n", out);
      if (!curve_path.empty()) fs::write_file_atomic(curve_path, evalsuite::entropy_curve_csv(m));
      return kExitOk;
    }
    if (*eval_redundancy) {
      const auto r = evalsuite::redundancy_similarities(redundancy_pairs(reports_dir, records_dir), gateway);
      detail::write_or_print(out_path, evalsuite::to_json(r).dump(2) + "\n", out);
      return kExitOk;
    }
    if (*eval_lengths) {
      const auto s = length_stats_for(reports_dir);
      detail::write_or_print(out_path, evalsuite::to_json(s).dump(2) + "\n", out);
      if (!series_path.empty()) fs::write_file_atomic(series_path, evalsuite::length_series_csv(s));
      return kExitOk;
    }
    if (*synth) {
      const auto r = run_synth_task(task_path, gateway);
      detail::write_or_print(out_path, to_json(r).dump(2) + "\n", out);
      return kExitOk;
    }
    if (*serve) {
      server::ServerConfig sc;
      sc.port = port > 0 ? port : server::port_from_env();
      server::Server srv(sc, gateway);
      srv.install(service::Catalog::load(index_path, optional_reports()));
      err << "serving on port " << sc.port << "\n";
      srv.listen();
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return is_user_error(e.code()) ? kExitUser : kExitInternal;
  } catch (const nlohmann::json::exception& e) {
    err << "error [parse-error]: " << e.what() << "\n";
    return kExitUser;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  err << app.help();
  return kExitUser;
}

}  // namespace datascout::cli
