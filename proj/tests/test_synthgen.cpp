// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "datascout/core/fs.hpp"
#include "datascout/core/text.hpp"
#include "datascout/ingest/tabular.hpp"
#include "datascout/modelgw.hpp"
#include "datascout/synthgen.hpp"
#include "support.hpp"

using namespace datascout;
using namespace datascout::synthgen;
using testsupport::TempDir;

namespace {

ingest::CanonicalTable iris() { return ingest::parse_csv(fs::read_file(testsupport::fixtures() / "iris.csv")); }

std::size_t occurrences(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

GenerationTask iris_task(const std::filesystem::path& out, bool with_stats) {
  const auto table = iris();
  GenerationTask t;
  t.subject = "Iris";
  t.examples = examples_text(select_examples(table));
  if (with_stats) t.metadata_stats = render_metadata_stats(profiles_from_table(table));
  t.output_path = out;
  return t;
}

std::string fenced(const std::string& code) { return "Here is the script.\n```python\n" + code + "```\nDone."; }

std::set<std::string> listing(const std::filesystem::path& dir) {
  std::set<std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    out.insert(std::filesystem::relative(e.path(), dir).string());
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("Synthgen: prompt with statistics embeds the stats block", "[unit][synthgen]") {
  TempDir dir("prompt");
  const auto t = iris_task(dir / "out.csv", true);
  const auto p = build_generation_prompt(t);
  CHECK(p.find("generate synthetic data from a query") != std::string::npos);
  CHECK(p.find("Generate 100 synthetic data samples about the Iris dataset.") != std::string::npos);
  CHECK(p.find("statistical information contained in Column \"SepalLengthCm\"") != std::string::npos);
  CHECK(p.find("as in the examples above.") == std::string::npos);
  CHECK(p.find(t.examples) != std::string::npos);
  CHECK(occurrences(p, "synthetic.csv") == 1);
  CHECK(p.find("{") == p.find("{\"count\""));
}

TEST_CASE("Synthgen: prompt without statistics points at the examples", "[unit][synthgen]") {
  TempDir dir("prompt2");
  const auto p = build_generation_prompt(iris_task(dir / "out.csv", false));
  CHECK(p.find("as in the examples above.") != std::string::npos);
  CHECK(p.find("statistical information") == std::string::npos);
  CHECK(occurrences(p, "synthetic.csv") == 1);
  CHECK(p.find("{n_samples}") == std::string::npos);
  CHECK(p.find("{subject}") == std::string::npos);
}

TEST_CASE("Synthgen: metadata statistics follow the column line format", "[unit][synthgen]") {
  const auto stats = render_metadata_stats(profiles_from_table(iris()));
  const auto lines = text::split_lines(stats);
  REQUIRE(lines.size() == 5);
  CHECK(lines[0].rfind("Column \"SepalLengthCm\" (numeric-continuous): {\"count\":150,", 0) == 0);
  CHECK(lines[4].rfind("Column \"Species\" (categorical): {\"values\":{", 0) == 0);
  const auto info = nlohmann::json::parse(lines[1].substr(lines[1].find('{')));
  CHECK(info["min"].get<double>() <= info["q25"].get<double>());
  CHECK(info["q25"].get<double>() <= info["median"].get<double>());
  CHECK(info["median"].get<double>() <= info["q75"].get<double>());
  CHECK(info["q75"].get<double>() <= info["max"].get<double>());
}

TEST_CASE("Synthgen: code block extraction takes the first fence", "[unit][synthgen]") {
  CHECK(extract_code_block("text\n```python\nprint(1)\n```\n```\nx\n```") == std::optional<std::string>("print(1)\n"));
  CHECK(extract_code_block("```\na\n```") == std::optional<std::string>("a\n"));
  CHECK_FALSE(extract_code_block("no code here").has_value());
  CHECK_FALSE(extract_code_block("```python\nunterminated").has_value());
}

TEST_CASE("Synthgen: task validation", "[unit][synthgen]") {
  TempDir dir("task");
  auto t = iris_task(dir / "out.csv", false);
  CHECK_NOTHROW(t.validate());
  auto bad = t;
  bad.examples = "a,b\n1,2\n";
  CHECK_ERROR_CODE(bad.validate(), ErrorCode::kInvalidArgument);
  bad = t;
  bad.output_file = "../escape.csv";
  CHECK_ERROR_CODE(bad.validate(), ErrorCode::kInvalidArgument);
  bad = t;
  bad.max_retries = 0;
  CHECK_ERROR_CODE(bad.validate(), ErrorCode::kInvalidArgument);
  bad = t;
  bad.subject = " ";
  CHECK_ERROR_CODE(bad.validate(), ErrorCode::kInvalidArgument);
}

TEST_CASE("Synthgen: stub agent succeeds on the first attempt", "[unit][synthgen]") {
  TempDir dir("agent");
  const auto t = iris_task(dir / "final" / "iris_synth.csv", true);
  ProcessSandbox sandbox;
  const auto outcome = run_generation_agent(t, modelgw::Gateway::stub(), sandbox, dir / "scratch");
  REQUIRE(outcome.attempts.size() == 1);
  CHECK(outcome.attempts[0].code_found);
  CHECK(outcome.attempts[0].exit_status == 0);
  CHECK(outcome.table.row_count == 100);
  CHECK(outcome.table.columns.size() == 5);
  CHECK(std::filesystem::exists(dir / "final" / "iris_synth.csv"));
  CHECK(std::filesystem::exists(dir / "scratch" / "attempt-1" / "synthetic.csv"));
  const auto sepal = outcome.table.find("SepalWidthCm")->finite_numbers();
  CHECK(sepal.size() == 100);
  for (double v : sepal) {
    CHECK(v >= 2.0);
    CHECK(v <= 4.4);
  }
}

TEST_CASE("Synthgen: a failed script is retried with its error output", "[unit][synthgen]") {
  TempDir dir("retry");
  const auto t = iris_task(dir / "out.csv", false);
  const std::string broken = "raise SystemExit('QXBROKEN')\n";
  const std::string good =
      "with open('synthetic.csv', 'w') as f:\n"
      "    f.write('a,b\\n')\n"
      "    for i in range(100):\n"
      "        f.write(f'{i},{i * 2}\\n')\n";
  auto chat = std::make_shared<modelgw::ScriptedChat>(std::vector<std::string>{fenced(broken), fenced(good)});
  ProcessSandbox sandbox;
  const auto outcome = run_generation_agent(t, modelgw::Gateway::stub().with_chat(chat), sandbox, dir / "scratch");
  REQUIRE(outcome.attempts.size() == 2);
  CHECK(outcome.attempts[0].exit_status == 1);
  CHECK(outcome.attempts[0].error.find("QXBROKEN") != std::string::npos);
  CHECK(outcome.attempts[1].error.empty());
  CHECK(outcome.table.row_count == 100);
  const auto prompts = chat->prompts();
  REQUIRE(prompts.size() == 2);
  CHECK(prompts[0].find("QXBROKEN") == std::string::npos);
  CHECK(prompts[1].find("QXBROKEN") != std::string::npos);
  CHECK(prompts[1].rfind(prompts[0], 0) == 0);
}

TEST_CASE("Synthgen: replies without code exhaust the retries", "[unit][synthgen]") {
  TempDir dir("nocode");
  auto t = iris_task(dir / "out.csv", false);
  t.max_retries = 2;
  auto chat = std::make_shared<modelgw::ScriptedChat>(std::vector<std::string>{"I would rather describe it in prose."});
  ProcessSandbox sandbox;
  try {
    run_generation_agent(t, modelgw::Gateway::stub().with_chat(chat), sandbox, dir / "scratch");
    FAIL("expected failure");
  } catch (const GenerationFailure& e) {
    CHECK(e.code() == ErrorCode::kNoCodeBlock);
    CHECK(e.attempts().size() == 2);
    CHECK_FALSE(e.attempts()[0].code_found);
  }
  CHECK(chat->prompts().size() == 2);
  CHECK_FALSE(std::filesystem::exists(dir / "out.csv"));
}

TEST_CASE("Synthgen: wrong row counts are rejected", "[unit][synthgen]") {
  TempDir dir("rows");
  auto t = iris_task(dir / "out.csv", false);
  t.max_retries = 1;
  auto chat = std::make_shared<modelgw::ScriptedChat>(
      std::vector<std::string>{fenced("open('synthetic.csv', 'w').write('a\\n1\\n2\\n')\n")});
  ProcessSandbox sandbox;
  try {
    run_generation_agent(t, modelgw::Gateway::stub().with_chat(chat), sandbox, dir / "scratch");
    FAIL("expected failure");
  } catch (const GenerationFailure& e) {
    CHECK(e.code() == ErrorCode::kRetriesExhausted);
    REQUIRE(e.attempts().size() == 1);
    CHECK(e.attempts()[0].error == "expected 100 rows, got 2");
  }
}

TEST_CASE("Synthgen: sandbox strips the environment and keeps writes in scratch", "[unit][synthgen]") {
  TempDir dir("sandbox");
  std::filesystem::create_directories(dir / "outside");
  const auto before = listing(dir / "outside");
  const std::string outside = (dir / "outside" / "leak.txt").string();
  const std::string script =
      "import os\n"
      "open('env.txt', 'w').write(','.join(sorted(os.environ)))\n"
      "try:\n"
      "    open(" + nlohmann::json(outside).dump() + ", 'w').write('x')\n"
      "except OSError:\n"
      "    pass\n"
      "open('out.csv', 'w').write('ok')\n";
  ProcessSandbox sandbox;
  const auto r = sandbox.run(script, dir / "scratch", "out.csv");
  CHECK(r.exit_status == 0);
  CHECK(r.succeeded());
  CHECK(r.produced_file.has_value());
  const auto env = fs::read_file(dir / "scratch" / "env.txt");
  CHECK(env.find("HOME") == std::string::npos);
  CHECK(env.find("SCRATCH") != std::string::npos);
  if (r.writes_confined) CHECK(listing(dir / "outside") == before);
}

TEST_CASE("Synthgen: sandbox enforces the wall-clock timeout", "[unit][synthgen]") {
  TempDir dir("timeout");
  ProcessSandboxConfig cfg;
  cfg.timeout = std::chrono::seconds(1);
  ProcessSandbox sandbox(cfg);
  const auto r = sandbox.run("import time\ntime.sleep(30)\n", dir / "scratch", "out.csv");
  CHECK(r.timed_out);
  CHECK_FALSE(r.succeeded());
  CHECK(r.wall_time_seconds < 10.0);

  const auto failing = sandbox.run("import sys\nsys.exit(3)\n", dir / "scratch2", "out.csv");
  CHECK(failing.exit_status == 3);
  CHECK_FALSE(failing.produced_file.has_value());
}

TEST_CASE("Synthgen: KDE sampler is deterministic and keeps column kinds", "[unit][synthgen]") {
  const auto table = iris();
  const auto profiles = profiles_from_table(table);
  const auto a = kde_sampler(profiles, 200, 9);
  const auto b = kde_sampler(profiles, 200, 9);
  CHECK(ingest::to_csv(a) == ingest::to_csv(b));
  CHECK(ingest::to_csv(a) != ingest::to_csv(kde_sampler(profiles, 200, 10)));
  REQUIRE(a.columns.size() == table.columns.size());
  CHECK(a.row_count == 200);
  for (std::size_t i = 0; i < a.columns.size(); ++i) {
    CHECK(a.columns[i].name == table.columns[i].name);
    CHECK(a.columns[i].kind == table.columns[i].kind);
  }
  const std::set<std::string> species = {"Iris-setosa", "Iris-versicolor", "Iris-virginica"};
  for (const auto& v : a.find("Species")->values) CHECK(species.count(*v) == 1);
  CHECK_ERROR_CODE(kde_sampler({}, 10), ErrorCode::kInvalidArgument);
}

TEST_CASE("Synthgen: KDE sampler snaps discrete columns to observed values", "[unit][synthgen]") {
  const auto table = ingest::parse_csv(fs::read_file(testsupport::fixtures() / "cars.csv"));
  const auto* doors = table.find("Doors");
  REQUIRE(doors != nullptr);
  REQUIRE(doors->kind == ingest::FeatureKind::kNumericDiscrete);
  const auto observed = doors->finite_numbers();
  const std::set<double> support(observed.begin(), observed.end());
  const auto synth = kde_sampler(profiles_from_table(table), 500, 3);
  for (double v : synth.find("Doors")->finite_numbers()) CHECK(support.count(v) == 1);
}

TEST_CASE("Synthgen: KDE sampler reproduces the source mean", "[property][synthgen]") {
  Rng rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const double centre = rng.uniform(-50.0, 50.0);
    std::vector<double> xs;
    for (int i = 0; i < 200; ++i) xs.push_back(centre + rng.normal());
    ColumnProfile p{"x", ingest::FeatureKind::kNumericContinuous, analyze::kde_fit(xs, std::nullopt, "x"), std::nullopt};
    const auto synth = kde_sampler({p}, 1000, trial);
    CHECK(std::abs(mean_of(synth.columns[0].finite_numbers()) - mean_of(xs)) < 0.2);
  }
}

TEST_CASE("Synthgen: KDE sampler matches the Iris sepal width distribution", "[unit][synthgen]") {
  const auto table = iris();
  const auto kde = kde_sampler(profiles_from_table(table), 10000);
  const auto baseline = examples_only_sampler(select_examples(table), 10000);
  const auto good = feature_overlaps(table, kde);
  const auto base = feature_overlaps(table, baseline);
  const auto pick = [](const std::vector<evalsuite::OverlapScore>& v, const std::string& name) {
    for (const auto& s : v) {
      if (s.feature_name == name) return s.percent;
    }
    return -1.0;
  };
  CHECK(good.size() == 4);
  CHECK(pick(good, "SepalWidthCm") >= 85.0);
  CHECK(pick(good, "SepalWidthCm") > pick(base, "SepalWidthCm"));
}

TEST_CASE("Synthgen: examples-only baseline stays inside the example range", "[unit][synthgen]") {
  const auto examples = select_examples(iris());
  CHECK(examples.row_count == 5);
  const auto ex = examples.find("PetalLengthCm")->finite_numbers();
  const auto [mn, mx] = std::minmax_element(ex.begin(), ex.end());
  const auto synth = examples_only_sampler(examples, 300, 1);
  for (double v : synth.find("PetalLengthCm")->finite_numbers()) {
    CHECK(v >= *mn);
    CHECK(v <= *mx);
  }
  CHECK_ERROR_CODE(select_examples(examples, 6), ErrorCode::kInsufficientData);
}

TEST_CASE("Synthgen: constant columns sample around the constant", "[unit][synthgen]") {
  const std::vector<double> xs(50, 7.0);
  ColumnProfile p{"c", ingest::FeatureKind::kNumericContinuous, analyze::kde_fit(xs, std::nullopt, "c"), std::nullopt};
  CHECK(p.kde->bandwidth == 1.0);
  const auto synth = kde_sampler({p}, 1000);
  CHECK(std::abs(mean_of(synth.columns[0].finite_numbers()) - 7.0) < 0.2);
}

TEST_CASE("Synthgen: continuous samples keep the recorded precision", "[unit][synthgen]") {
  const auto synth = kde_sampler(profiles_from_table(iris()), 500, 4);
  for (double v : synth.find("SepalWidthCm")->finite_numbers()) {
    CHECK(std::abs(v * 10.0 - std::round(v * 10.0)) < 1e-6);
  }
  CHECK(detail::recorded_decimals({1.0, 2.0}) == 0);
  CHECK(detail::recorded_decimals({1.25, 2.5}) == 2);
  CHECK(detail::recorded_decimals({0.1234567}) == 6);
}
