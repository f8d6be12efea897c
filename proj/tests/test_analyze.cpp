// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "datascout/analyze/analyze_file.hpp"
#include "datascout/analyze/captions.hpp"
#include "datascout/analyze/correlation.hpp"
#include "datascout/analyze/kde.hpp"
#include "datascout/analyze/predictability.hpp"
#include "datascout/analyze/result.hpp"
#include "datascout/analyze/text_summary.hpp"
#include "datascout/analyze/words.hpp"
#include "datascout/core/fs.hpp"
#include "datascout/core/rng.hpp"
#include "datascout/ingest/document.hpp"
#include "datascout/ingest/file_entry.hpp"
#include "datascout/ingest/tabular.hpp"
#include "datascout/modelgw.hpp"
#include "support.hpp"

using namespace datascout;
using namespace datascout::analyze;
using testsupport::TempDir;

namespace {

std::vector<double> standard_normals(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

double direct_density(const std::vector<double>& xs, double h, double at) {
  double s = 0.0;
  for (double x : xs) s += std::exp(-0.5 * (at - x) * (at - x) / (h * h));
  return s / (static_cast<double>(xs.size()) * h * std::sqrt(2.0 * std::numbers::pi));
}

double sample_sd(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

ingest::CanonicalTable table_from(const std::vector<std::string>& names, const std::vector<std::vector<double>>& cols) {
  std::ostringstream csv;
  for (std::size_t j = 0; j < names.size(); ++j) csv << (j ? "," : "") << names[j];
  csv << "\n";
  for (std::size_t i = 0; i < cols.front().size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) csv << (j ? "," : "") << text::format_double(cols[j][i]);
    csv << "\n";
  }
  return ingest::parse_csv(csv.str());
}

std::string sentence_body(std::size_t n) {
  std::string body;
  for (std::size_t i = 0; i < n; ++i) body += "Sentence number " + std::to_string(i) + " reports a measured value. ";
  return body;
}

}  // namespace

// ---------------------------------------------------------------------------
// KDE

TEST_CASE("Analyze: KDE of two zeros with unit bandwidth peaks at the normal density", "[unit][analyze]") {
  const std::vector<double> xs{0.0, 0.0};
  const auto p = kde_fit(xs, 1.0);
  CHECK(p.evaluate(0.0) == Catch::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).margin(1e-12));
  CHECK(p.n == 2);
  CHECK(p.grid.size() == kKdeGridPoints);
  CHECK(p.densities.size() == kKdeGridPoints);
}

TEST_CASE("Analyze: KDE of 1000 standard normals matches the density at zero", "[unit][analyze]") {
  const auto xs = standard_normals(1000, 7);
  const auto p = kde_fit(xs);
  CHECK(std::abs(p.evaluate(0.0) - 0.3989) <= 0.05);
  CHECK(p.evaluate(0.0) == Catch::Approx(direct_density(xs, p.bandwidth, 0.0)).margin(1e-12));
}

TEST_CASE("Analyze: Silverman bandwidth matches an independent computation", "[unit][analyze]") {
  auto xs = standard_normals(500, 11);
  auto sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  auto q = [&](double f) {
    const double pos = f * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
  };
  const double expected = 0.9 * std::min(sample_sd(xs), (q(0.75) - q(0.25)) / 1.34) * std::pow(500.0, -0.2);
  CHECK(silverman_bandwidth(xs) == Catch::Approx(expected).epsilon(1e-12));
}

TEST_CASE("Analyze: KDE grid integrates to one", "[property][analyze]") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    const std::size_t n = 2 + rng.below(300);
    std::vector<double> xs(n);
    const double scale = rng.uniform(0.1, 50.0);
    for (auto& x : xs) x = rng.uniform(-1.0, 1.0) * scale + (rng.uniform() < 0.3 ? 10.0 * scale : 0.0);
    const auto p = kde_fit(xs);
    CHECK(std::abs(p.grid_integral() - 1.0) <= 1e-2);
    for (double d : p.densities) CHECK(d >= 0.0);
  }
}

TEST_CASE("Analyze: KDE is translation equivariant", "[property][analyze]") {
  const auto xs = standard_normals(200, 3);
  const auto base = kde_fit(xs);
  for (double c : {-5.0, 0.25, 3.0, 1000.0}) {
    std::vector<double> shifted(xs);
    for (auto& x : shifted) x += c;
    const auto p = kde_fit(shifted);
    CHECK(p.bandwidth == Catch::Approx(base.bandwidth).epsilon(1e-9));
    for (double at : {-2.0, -0.5, 0.0, 0.7, 1.9}) {
      CHECK(p.evaluate(at + c) == Catch::Approx(base.evaluate(at)).margin(1e-9));
    }
  }
}

TEST_CASE("Analyze: KDE ignores non-finite values and rejects short samples", "[unit][analyze]") {
  const std::vector<double> one{1.0};
  CHECK_ERROR_CODE(kde_fit(one), ErrorCode::kInsufficientData);
  const std::vector<double> nan_heavy{std::nan(""), 2.0, INFINITY};
  CHECK_ERROR_CODE(kde_fit(nan_heavy), ErrorCode::kInsufficientData);
  const std::vector<double> xs{1.0, 2.0, std::nan(""), 3.0};
  CHECK(kde_fit(xs).n == 3);
  const std::vector<double> constant{4.0, 4.0, 4.0};
  CHECK(silverman_bandwidth(constant) == 1.0);
  CHECK_ERROR_CODE(kde_fit(xs, -1.0), ErrorCode::kInvalidArgument);
}

// ---------------------------------------------------------------------------
// Correlation

TEST_CASE("Analyze: Pearson correlation of simple columns", "[unit][analyze]") {
  using V = std::vector<std::optional<double>>;
  CHECK(*pearson(V{1, 2, 3, 4}, V{2, 4, 6, 8}) == Catch::Approx(1.0).margin(1e-12));
  CHECK(*pearson(V{1, 2, 3, 4}, V{8, 6, 4, 2}) == Catch::Approx(-1.0).margin(1e-12));
  CHECK_FALSE(pearson(V{1, 2}, V{3, 4}).has_value());
  CHECK_FALSE(pearson(V{1, 2, 3}, V{5, 5, 5}).has_value());
  CHECK_FALSE(pearson(V{1, std::nullopt, 3, std::nullopt}, V{1, 2, 3, 4}).has_value());
  // Against a hand-computed value: x = 1..5, y = 2,1,4,3,5 gives r = 0.8.
  CHECK(*pearson(V{1, 2, 3, 4, 5}, V{2, 1, 4, 3, 5}) == Catch::Approx(0.8).margin(1e-12));
}

TEST_CASE("Analyze: correlation matrix is symmetric with a unit diagonal", "[property][analyze]") {
  Rng rng(5);
  std::vector<std::vector<double>> cols(4, std::vector<double>(60));
  for (std::size_t i = 0; i < 60; ++i) {
    cols[0][i] = rng.normal();
    cols[1][i] = cols[0][i] * 0.5 + rng.normal();
    cols[2][i] = rng.uniform(0, 10);
    cols[3][i] = -3.0 * cols[0][i] + 7.0;
  }
  const auto m = feature_correlations(table_from({"a", "b", "c", "d"}, cols));
  REQUIRE(m.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(m.at(i, i) == Catch::Approx(1.0).margin(1e-9));
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(m.at(i, j) == m.at(j, i));
      CHECK(std::abs(m.at(i, j)) <= 1.0 + 1e-12);
    }
  }
  // Affine map with negative slope flips the sign exactly.
  CHECK(m.at(0, 3) == Catch::Approx(-1.0).margin(1e-9));
  CHECK(m.at(1, 3) == Catch::Approx(-m.at(1, 0)).margin(1e-9));
  const auto top = m.top_pairs(1);
  REQUIRE(top.size() == 1);
  CHECK(top[0].first == std::pair<std::string, std::string>{"a", "d"});
}

TEST_CASE("Analyze: correlations need two numeric columns", "[unit][analyze]") {
  const auto t = ingest::parse_csv("x,label\n1,a\n2,b\n3,c\n");
  CHECK_ERROR_CODE(feature_correlations(t), ErrorCode::kNoNumericColumns);
}

TEST_CASE("Analyze: constant columns yield undefined pairs", "[unit][analyze]") {
  const auto t = ingest::parse_csv("x,y,z\n1,5,2\n2,5,4\n3,5,7\n4,5,1\n");
  const auto m = feature_correlations(t);
  CHECK_FALSE(m.undefined_pairs.empty());
}

// ---------------------------------------------------------------------------
// Predictability

TEST_CASE("Analyze: a linear target is fully predictable", "[unit][analyze]") {
  Rng rng(9);
  std::vector<double> x(80), y(80), z(80);
  for (std::size_t i = 0; i < 80; ++i) {
    x[i] = rng.uniform(-5, 5);
    z[i] = rng.normal();
    y[i] = 2.0 * x[i];
  }
  const auto s = feature_predictability(table_from({"x", "z", "y"}, {x, z, y}), "y");
  CHECK(s.score >= 0.99);
  CHECK(s.method == PredictabilityMethod::kLinearR2);
}

TEST_CASE("Analyze: an independent noise target is barely predictable", "[unit][analyze]") {
  Rng rng(10);
  std::vector<double> a(200), b(200), y(200);
  for (std::size_t i = 0; i < 200; ++i) {
    a[i] = rng.normal();
    b[i] = rng.normal();
    y[i] = rng.normal();
  }
  const auto s = feature_predictability(table_from({"a", "b", "y"}, {a, b, y}), "y");
  CHECK(s.score <= 0.2);
  CHECK(s.score >= 0.0);
}

TEST_CASE("Analyze: a constant categorical target scores zero", "[unit][analyze]") {
  std::string csv = "x,label\n";
  for (int i = 0; i < 30; ++i) csv += std::to_string(i) + ",same\n";
  const auto s = feature_predictability(ingest::parse_csv(csv), "label");
  CHECK(s.score == 0.0);
}

TEST_CASE("Analyze: Iris species is predictable from the measurements", "[unit][analyze]") {
  const auto t = ingest::load_tabular(testsupport::fixtures() / "iris.csv");
  const auto s = feature_predictability(t, "Species");
  CHECK(s.score > 0.5);
  CHECK(s.score <= 1.0);
}

TEST_CASE("Analyze: predictability preconditions", "[unit][analyze]") {
  const auto small = ingest::parse_csv("x,y\n1,2\n2,4\n3,6\n");
  CHECK_ERROR_CODE(feature_predictability(small, "y"), ErrorCode::kTooFewRows);
  CHECK_ERROR_CODE(feature_predictability(small, "nope"), ErrorCode::kTargetMissing);
}

// ---------------------------------------------------------------------------
// Word distribution

TEST_CASE("Analyze: word distribution drops stop words and ranks by count", "[unit][analyze]") {
  const auto d = word_distribution("the cat sat. The CAT ran");
  const std::vector<std::pair<std::string, std::size_t>> expected{{"cat", 2}, {"ran", 1}, {"sat", 1}};
  CHECK(d.vocabulary == expected);
  CHECK(d.total_tokens == 4);
}

TEST_CASE("Analyze: word distribution of an empty body is empty", "[unit][analyze]") {
  const auto d = word_distribution("");
  CHECK(d.vocabulary.empty());
  CHECK(d.total_tokens == 0);
}

TEST_CASE("Analyze: concatenating a document with itself doubles every count", "[property][analyze]") {
  Rng rng(4);
  const std::vector<std::string> pool{"alpha", "beta", "gamma", "delta", "the", "of", "sensor", "river", "x1"};
  for (int trial = 0; trial < 20; ++trial) {
    std::string body;
    for (int i = 0; i < 40; ++i) body += pool[rng.below(pool.size())] + (rng.uniform() < 0.2 ? ". " : " ");
    const auto once = word_distribution(body);
    const auto twice = word_distribution(body + " " + body);
    REQUIRE(once.vocabulary.size() == twice.vocabulary.size());
    CHECK(twice.total_tokens == 2 * once.total_tokens);
    for (std::size_t i = 0; i < once.vocabulary.size(); ++i) {
      CHECK(twice.vocabulary[i].first == once.vocabulary[i].first);
      CHECK(twice.vocabulary[i].second == 2 * once.vocabulary[i].second);
    }
  }
}

TEST_CASE("Analyze: word distribution truncates to top_k but counts everything", "[unit][analyze]") {
  const auto d = word_distribution("apple apple banana cherry", 2);
  REQUIRE(d.vocabulary.size() == 2);
  CHECK(d.vocabulary[0].first == "apple");
  CHECK(d.vocabulary[1].first == "banana");
  CHECK(d.total_tokens == 4);
}

// ---------------------------------------------------------------------------
// Text summaries

TEST_CASE("Analyze: stub summary bullets come from the document", "[unit][analyze]") {
  const auto gw = modelgw::Gateway::stub();
  const auto doc = ingest::make_document("d1", "Rivers carry sediment. Sensors log turbidity hourly. Floods raise it. "
                                               "Droughts lower it.");
  const auto s = summarize_text(doc, gw);
  REQUIRE(s.available);
  CHECK(s.windows == 1);
  const auto lines = text::split_lines(s.text);
  CHECK(lines.size() == 3);
  for (const auto& line : lines) {
    REQUIRE(line.rfind("- ", 0) == 0);
    CHECK(doc.body.find(line.substr(2)) != std::string::npos);
  }
}

TEST_CASE("Analyze: long documents are summarized per window and merged", "[unit][analyze]") {
  auto chat = std::make_shared<modelgw::ScriptedChat>(std::vector<std::string>{"- first half", "- second half",
                                                                               "- merged"});
  const auto gw = modelgw::Gateway::stub().with_chat(chat);
  const auto doc = ingest::make_document("d2", sentence_body(20));
  const auto s = summarize_text(doc, gw, doc.token_count / 2 + 1);
  CHECK(s.available);
  CHECK(s.windows == 2);
  CHECK(s.text == "- merged");
  const auto prompts = chat->prompts();
  REQUIRE(prompts.size() == 3);
  CHECK(prompts[0].find(prompts::kSummarizeMarker) != std::string::npos);
  CHECK(prompts[2].find(prompts::kMergeMarker) != std::string::npos);
  CHECK(prompts[2].find("first half") != std::string::npos);
  CHECK(prompts[2].find("second half") != std::string::npos);
}

TEST_CASE("Analyze: window splitting covers every token once", "[property][analyze]") {
  const auto body = sentence_body(37);
  for (std::size_t w : {1u, 7u, 50u, 1000u}) {
    const auto windows = split_windows(body, w);
    std::size_t tokens = 0;
    for (const auto& x : windows) {
      CHECK(text::count_tokens(x) <= w);
      tokens += text::count_tokens(x);
    }
    CHECK(tokens == text::count_tokens(body));
  }
}

TEST_CASE("Analyze: a failing gateway leaves the summary unavailable", "[unit][analyze]") {
  auto chat = std::make_shared<modelgw::FunctionChat>(
      [](const std::string&) -> std::string { fail(ErrorCode::kTransportFailure, "backend down"); });
  modelgw::GatewayConfig cfg;
  cfg.retry_count = 1;
  const auto gw = modelgw::Gateway::stub(cfg).with_chat(chat);
  const auto s = summarize_text(ingest::make_document("d3", "Some text here. More text."), gw);
  CHECK_FALSE(s.available);
  CHECK(s.text.empty());
  CHECK(s.note.find("summary-unavailable") != std::string::npos);
}

// ---------------------------------------------------------------------------
// Captions

TEST_CASE("Analyze: stub captions are short content hashes", "[unit][analyze]") {
  TempDir dir("cap");
  fs::write_file_atomic(dir / "a.png", "not really a png");
  const auto caps = caption_images({dir / "a.png"}, modelgw::Gateway::stub());
  REQUIRE(caps.size() == 1);
  CHECK(caps[0] == "image:" + hashing::sha256_hex("not really a png").substr(0, 8));
}

TEST_CASE("Analyze: caption sampling is capped and seeded", "[unit][analyze]") {
  CHECK(sample_image_indices(10).size() == 10);
  const auto a = sample_image_indices(100);
  CHECK(a.size() == kMaxCaptionedImages);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(std::set<std::size_t>(a.begin(), a.end()).size() == a.size());
  CHECK(a == sample_image_indices(100));
  CHECK(a != sample_image_indices(100, kMaxCaptionedImages, 43));

  TempDir dir("cap100");
  std::vector<std::filesystem::path> paths;
  for (int i = 0; i < 100; ++i) {
    paths.push_back(dir / ("img" + std::to_string(i) + ".png"));
    fs::write_file_atomic(paths.back(), "pixels " + std::to_string(i));
  }
  CHECK(caption_images(paths, modelgw::Gateway::stub()).size() == 32);
}

TEST_CASE("Analyze: unreadable images get the placeholder caption", "[unit][analyze]") {
  TempDir dir("capbad");
  fs::write_file_atomic(dir / "ok.png", "bytes");
  fs::write_file_atomic(dir / "empty.png", "");
  const auto caps = caption_images({dir / "missing.png", dir / "ok.png", dir / "empty.png"}, modelgw::Gateway::stub());
  REQUIRE(caps.size() == 3);
  CHECK(caps[0] == kCaptionUnavailable);
  CHECK(caps[1].rfind("image:", 0) == 0);
  CHECK(caps[2] == kCaptionUnavailable);
}

// ---------------------------------------------------------------------------
// File dispatch

TEST_CASE("Analyze: files dispatch on modality", "[unit][analyze]") {
  const auto gw = modelgw::Gateway::stub();
  AnalyzeOptions opts;
  opts.clock = fixed_clock("2026-01-01T00:00:00Z");
  const auto files = testsupport::fixtures() / "community" / "files";

  const auto csv = analyze_file(ingest::FileEntry::from_path("1001", files / "1001" / "catalyst_runs.csv"), gw, opts);
  CHECK(csv.modality == Modality::kTabular);
  CHECK(csv.consistent());
  CHECK(csv.produced_at == "2026-01-01T00:00:00Z");
  REQUIRE(csv.tabular() != nullptr);
  CHECK(csv.tabular()->row_count == 40);
  CHECK(csv.tabular()->kde.size() == 3);
  CHECK(csv.tabular()->correlations.has_value());
  CHECK_FALSE(csv.tabular()->predictability.empty());

  const auto txt = analyze_file(ingest::FileEntry::from_path("1001", files / "1001" / "notes.txt"), gw, opts);
  CHECK(txt.modality == Modality::kText);
  REQUIRE(txt.text() != nullptr);
  CHECK(txt.text()->summary_available);
  CHECK(txt.text()->token_count > 0);
  CHECK_FALSE(txt.text()->words.vocabulary.empty());

  const auto png = analyze_file(ingest::FileEntry::from_path("1002", files / "1002" / "micrograph.png"), gw, opts);
  CHECK(png.modality == Modality::kImage);
  REQUIRE(png.image() != nullptr);
  CHECK(png.image()->captions.size() == 1);

  const auto xml = analyze_file(ingest::FileEntry::from_path("1002", files / "1002" / "spectra.xml"), gw, opts);
  CHECK(xml.modality == Modality::kTabular);
  CHECK(xml.tabular()->row_count == 30);
}

TEST_CASE("Analyze: unsupported files are skipped and results round-trip", "[unit][analyze]") {
  TempDir dir("rec");
  fs::write_file_atomic(dir / "data.csv", "a,b\n1,2\n2,4\n3,7\n4,8\n");
  fs::write_file_atomic(dir / "blob.bin", "\x01\x02");
  std::vector<ingest::FileEntry> entries{ingest::FileEntry::from_path("r1", dir / "blob.bin"),
                                         ingest::FileEntry::from_path("r1", dir / "data.csv")};
  AnalyzeOptions opts;
  opts.clock = fixed_clock("2026-01-01T00:00:00Z");
  std::vector<std::string> skipped;
  const auto results = analyze_record_files(entries, modelgw::Gateway::stub(), opts, &skipped);
  REQUIRE(results.size() == 1);
  CHECK(skipped == std::vector<std::string>{"blob.bin"});

  TempDir out("res");
  save_result(results[0], out.path());
  const auto back = load_result(out / (results[0].file_id + ".json"));
  CHECK(back.file_id == results[0].file_id);
  CHECK(back.file_name == "data.csv");
  REQUIRE(back.tabular() != nullptr);
  CHECK(back.tabular()->row_count == 4);
  CHECK(back.tabular()->kde.size() == 2);
  CHECK(back.tabular()->kde[0].samples == results[0].tabular()->kde[0].samples);
}
