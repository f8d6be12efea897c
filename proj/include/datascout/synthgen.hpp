// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "datascout/analyze/kde.hpp"
#include "datascout/analyze/result.hpp"
#include "datascout/core/error.hpp"
#include "datascout/core/fs.hpp"
#include "datascout/core/rng.hpp"
#include "datascout/core/text.hpp"
#include "datascout/evalsuite.hpp"
#include "datascout/ingest/tabular.hpp"
#include "datascout/modelgw.hpp"
#include "datascout/prompts.hpp"
#include "datascout/synthgen/sandbox.hpp"

namespace datascout::synthgen {

inline constexpr std::size_t kExampleRows = 5;
inline constexpr std::size_t kDefaultSamples = 100;
inline constexpr int kDefaultMaxRetries = 3;
inline constexpr std::uint64_t kGenerationSeed = 42;

/// Greedy decoding settings used for every script-generation call.
inline modelgw::ChatParams generation_params() {
  modelgw::ChatParams p;
  p.decoding_method = "greedy";
  p.min_new_tokens = 20;
  p.temperature = 1.0;
  p.stop_sequences = {"stop"};
  p.random_seed = kGenerationSeed;
  p.repetition_penalty = 1.0;
  p.top_p = 1.0;
  return p;
}

// ---------------------------------------------------------------------------
// Column profiles and samplers
// ---------------------------------------------------------------------------

/// What a sampler knows about one source column. Numeric columns carry a
/// KDE profile; all others carry value frequencies.
struct ColumnProfile {
  std::string name;
  ingest::FeatureKind kind = ingest::FeatureKind::kCategorical;
  std::optional<analyze::KdeProfile> kde;
  std::optional<analyze::CategoryFrequencies> categories;
};

inline std::vector<ColumnProfile> profiles_from_table(const ingest::CanonicalTable& table) {
  std::vector<ColumnProfile> out;
  for (const auto& c : table.columns) {
    ColumnProfile p{c.name, c.kind, std::nullopt, std::nullopt};
    if (ingest::is_numeric(c.kind)) {
      const auto values = c.finite_numbers();
      if (values.size() >= 2) p.kde = analyze::kde_fit(values, std::nullopt, c.name);
    } else {
      p.categories = analyze::category_frequencies(c);
    }
    out.push_back(std::move(p));
  }
  return out;
}

/// Profiles recovered from a stored tabular analysis.
inline std::vector<ColumnProfile> profiles_from_result(const analyze::AnalyzerResult& result) {
  const auto* tab = result.tabular();
  require(tab != nullptr, ErrorCode::kMissingProfile, "result for " + result.file_name + " is not tabular");
  std::vector<ColumnProfile> out;
  for (const auto& f : tab->features) {
    ColumnProfile p{f.name, f.kind, std::nullopt, std::nullopt};
    for (const auto& k : tab->kde) {
      if (k.feature_name == f.name) p.kde = k;
    }
    for (const auto& c : tab->categories) {
      if (c.feature_name == f.name) p.categories = c;
    }
    out.push_back(std::move(p));
  }
  return out;
}

namespace detail {

struct Moments {
  double mean = 0.0;
  double stddev = 0.0;
};

inline Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return m;
}

/// Linear-interpolated quantile of sorted data.
inline double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const std::size_t j = std::min(i + 1, sorted.size() - 1);
  return sorted[i] + (pos - static_cast<double>(i)) * (sorted[j] - sorted[i]);
}

inline std::string draw_category(const analyze::CategoryFrequencies& freq, Rng& rng) {
  std::size_t total = 0;
  for (const auto& [v, n] : freq.counts) total += n;
  auto r = rng.below(total);
  for (const auto& [v, n] : freq.counts) {
    if (r < n) return v;
    r -= n;
  }
  return freq.counts.back().first;
}

/// Fewest decimal places (at most 6) that represent every sample exactly.
inline int recorded_decimals(const std::vector<double>& samples) {
  for (int d = 0; d < 6; ++d) {
    const double scale = std::pow(10.0, d);
    bool exact = true;
    for (double x : samples) {
      const double scaled = x * scale;
      if (std::abs(scaled - std::round(scaled)) > 1e-6 * std::max(1.0, std::abs(scaled))) {
        exact = false;
        break;
      }
    }
    if (exact) return d;
  }
  return 6;
}

inline double round_to(double x, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(x * scale) / scale;
}

inline double nearest(const std::vector<double>& sorted, double x) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), x);
  if (it == sorted.end()) return sorted.back();
  if (it == sorted.begin()) return *it;
  const double hi = *it, lo = *(it - 1);
  return (x - lo) <= (hi - x) ? lo : hi;
}

}  // namespace detail

/// Statistics block handed to the generation prompt: one line per column,
/// `Column "<name>" (<kind>): <json>`.
inline std::string render_metadata_stats(const std::vector<ColumnProfile>& profiles) {
  std::string out;
  for (const auto& p : profiles) {
    nlohmann::ordered_json info = nlohmann::ordered_json::object();
    if (p.kde && !p.kde->samples.empty()) {
      auto sorted = p.kde->samples;
      std::sort(sorted.begin(), sorted.end());
      const auto m = detail::moments(sorted);
      info["count"] = sorted.size();
      info["mean"] = m.mean;
      info["std"] = m.stddev;
      info["min"] = sorted.front();
      info["q25"] = detail::quantile(sorted, 0.25);
      info["median"] = detail::quantile(sorted, 0.5);
      info["q75"] = detail::quantile(sorted, 0.75);
      info["max"] = sorted.back();
      info["kde_bandwidth"] = p.kde->bandwidth;
    } else if (p.categories) {
      nlohmann::ordered_json values = nlohmann::ordered_json::object();
      for (const auto& [v, n] : p.categories->counts) values[v] = n;
      info["values"] = values;
    } else {
      continue;
    }
    out += "Column " + nlohmann::json(p.name).dump() + " (" + std::string(ingest::to_string(p.kind)) + "): " +
           info.dump() + "\n";
  }
  if (!out.empty()) out.pop_back();
  return out;
}

/// Draws `n` rows: numeric columns from their KDE (a uniformly chosen
/// training sample plus N(0, h^2) noise, snapped to observed values for
/// discrete columns and rounded to the recorded precision of the samples
/// otherwise), other columns from their empirical frequencies. Output kinds
/// equal the source kinds.
inline ingest::CanonicalTable kde_sampler(const std::vector<ColumnProfile>& profiles, std::size_t n,
                                          std::uint64_t seed = kGenerationSeed) {
  require(!profiles.empty(), ErrorCode::kInvalidArgument, "no column profiles");
  Rng rng(seed);
  ingest::CanonicalTable out;
  out.row_count = n;
  for (const auto& p : profiles) {
    ingest::Column col{p.name, p.kind, {}};
    col.values.reserve(n);
    if (ingest::is_numeric(p.kind)) {
      require(p.kde.has_value() && !p.kde->samples.empty(), ErrorCode::kMissingProfile,
              "no KDE profile for numeric column " + p.name);
      const auto& kde = *p.kde;
      std::vector<double> support;
      if (p.kind == ingest::FeatureKind::kNumericDiscrete) {
        support = kde.samples;
        std::sort(support.begin(), support.end());
        support.erase(std::unique(support.begin(), support.end()), support.end());
      }
      const int decimals = detail::recorded_decimals(kde.samples);
      for (std::size_t i = 0; i < n; ++i) {
        const double centre = kde.samples[rng.below(kde.samples.size())];
        double v = centre + kde.bandwidth * rng.normal();
        v = support.empty() ? detail::round_to(v, decimals) : detail::nearest(support, v);
        col.values.emplace_back(text::format_double(v));
      }
    } else {
      require(p.categories.has_value() && !p.categories->counts.empty(), ErrorCode::kMissingProfile,
              "no value frequencies for column " + p.name);
      for (std::size_t i = 0; i < n; ++i) col.values.emplace_back(detail::draw_category(*p.categories, rng));
    }
    out.columns.push_back(std::move(col));
  }
  return out;
}

/// Baseline that sees only the example rows: numeric columns uniform on the
/// examples' [min, max] (integers for discrete columns), other columns a
/// uniform choice among the example values.
inline ingest::CanonicalTable examples_only_sampler(const ingest::CanonicalTable& examples, std::size_t n,
                                                    std::uint64_t seed = kGenerationSeed) {
  require(examples.row_count > 0, ErrorCode::kInsufficientData, "no example rows");
  Rng rng(seed);
  ingest::CanonicalTable out;
  out.row_count = n;
  for (const auto& c : examples.columns) {
    ingest::Column col{c.name, c.kind, {}};
    const auto nums = c.finite_numbers();
    std::vector<std::string> present;
    for (const auto& v : c.values) {
      if (v) present.push_back(*v);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (ingest::is_numeric(c.kind) && !nums.empty()) {
        const auto [mn, mx] = std::minmax_element(nums.begin(), nums.end());
        double v = rng.uniform(*mn, *mx);
        if (c.kind == ingest::FeatureKind::kNumericDiscrete) v = std::round(v);
        col.values.emplace_back(text::format_double(v));
      } else if (!present.empty()) {
        col.values.emplace_back(present[rng.below(present.size())]);
      } else {
        col.values.emplace_back(std::nullopt);
      }
    }
    out.columns.push_back(std::move(col));
  }
  return out;
}

/// `count` rows drawn without replacement, kept in source order.
inline ingest::CanonicalTable select_examples(const ingest::CanonicalTable& table, std::size_t count = kExampleRows,
                                              std::uint64_t seed = kGenerationSeed) {
  require(table.row_count >= count, ErrorCode::kInsufficientData,
          "need " + std::to_string(count) + " rows, table has " + std::to_string(table.row_count));
  std::vector<std::size_t> idx(table.row_count);
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(idx);
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  ingest::CanonicalTable out;
  out.row_count = count;
  for (const auto& c : table.columns) {
    ingest::Column col{c.name, c.kind, {}};
    for (auto i : idx) col.values.push_back(c.values[i]);
    out.columns.push_back(std::move(col));
  }
  return out;
}

/// Header plus rows as CSV with LF line endings.
inline std::string examples_text(const ingest::CanonicalTable& examples) {
  auto csv = ingest::to_csv(examples);
  text::replace_all(csv, "\r\n", "\n");
  while (!csv.empty() && csv.back() == '\n') csv.pop_back();
  return csv;
}

/// Histogram overlap at `bins` bins for every numeric column present in both
/// tables, over the real column's range.
inline std::vector<evalsuite::OverlapScore> feature_overlaps(const ingest::CanonicalTable& real,
                                                             const ingest::CanonicalTable& synth,
                                                             std::size_t bins = evalsuite::kDefaultOverlapBins) {
  std::vector<evalsuite::OverlapScore> out;
  for (const auto& c : real.columns) {
    if (!ingest::is_numeric(c.kind)) continue;
    const auto* s = synth.find(c.name);
    if (s == nullptr) continue;
    const auto rv = c.finite_numbers();
    const auto sv = s->finite_numbers();
    if (rv.empty() || sv.empty()) continue;
    out.push_back(evalsuite::histogram_overlap(rv, sv, bins, std::nullopt, c.name));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generation agent
// ---------------------------------------------------------------------------

struct GenerationTask {
  std::string subject;
  /// Header plus exactly five rows of CSV.
  std::string examples;
  std::optional<std::string> metadata_stats;
  std::filesystem::path output_path;
  std::size_t n_samples = kDefaultSamples;
  int max_retries = kDefaultMaxRetries;
  /// File name the script writes inside its scratch directory.
  std::string output_file = "synthetic.csv";

  void validate() const {
    require(!text::trim(subject).empty(), ErrorCode::kInvalidArgument, "empty subject");
    require(n_samples > 0, ErrorCode::kInvalidArgument, "n_samples must be positive");
    require(max_retries >= 1, ErrorCode::kInvalidArgument, "max_retries must be >= 1");
    require(!output_path.empty(), ErrorCode::kInvalidArgument, "empty output path");
    require(!output_file.empty() && output_file.find('/') == std::string::npos, ErrorCode::kInvalidArgument,
            "output file must be a bare file name");
    const auto table = ingest::parse_csv(examples);
    require(table.row_count == kExampleRows, ErrorCode::kInvalidArgument,
            "examples must hold exactly " + std::to_string(kExampleRows) + " rows, got " +
                std::to_string(table.row_count));
  }
};

inline std::string build_generation_prompt(const GenerationTask& task) {
  std::string sampling(task.metadata_stats ? prompts::kSamplingWithStats : prompts::kSamplingExamplesOnly);
  if (task.metadata_stats) text::replace_all(sampling, "{metadata_stats}", *task.metadata_stats);
  std::string p(prompts::kGenerationAgent);
  text::replace_all(p, "{n_samples}", std::to_string(task.n_samples));
  text::replace_all(p, "{subject}", task.subject);
  text::replace_all(p, "{examples}", task.examples);
  text::replace_all(p, "{sampling}", sampling);
  text::replace_all(p, "{output_file}", task.output_file);
  return p;
}

/// Body of the first fenced code block, or nullopt.
inline std::optional<std::string> extract_code_block(std::string_view reply) {
  const auto open = reply.find("```");
  if (open == std::string_view::npos) return std::nullopt;
  const auto body_start = reply.find('\n', open + 3);
  if (body_start == std::string_view::npos) return std::nullopt;
  const auto close = reply.find("```", body_start + 1);
  if (close == std::string_view::npos) return std::nullopt;
  return std::string(reply.substr(body_start + 1, close - body_start - 1));
}

struct AttemptLog {
  int attempt = 0;
  bool code_found = false;
  int exit_status = -1;
  bool timed_out = false;
  double wall_time_seconds = 0.0;
  std::string error;
};

inline nlohmann::json to_json(const AttemptLog& a) {
  return {{"attempt", a.attempt},       {"code_found", a.code_found}, {"exit_status", a.exit_status},
          {"timed_out", a.timed_out},   {"wall_time_s", a.wall_time_seconds}, {"error", a.error}};
}

struct GenerationOutcome {
  std::filesystem::path output_path;
  ingest::CanonicalTable table;
  std::vector<AttemptLog> attempts;
};

/// Raised once every attempt has failed; carries the attempt log.
class GenerationFailure : public Error {
 public:
  GenerationFailure(ErrorCode code, const std::string& message, std::vector<AttemptLog> attempts)
      : Error(code, message), attempts_(std::move(attempts)) {}
  const std::vector<AttemptLog>& attempts() const { return attempts_; }

 private:
  std::vector<AttemptLog> attempts_;
};

namespace detail {

inline std::string tail(const std::string& s, std::size_t max_bytes = 2000) {
  return s.size() <= max_bytes ? s : s.substr(s.size() - max_bytes);
}

inline std::string retry_note(const std::string& error) {
  std::string note(prompts::kGenerationRetry);
  text::replace_all(note, "{error}", error);
  return note;
}

}  // namespace detail

/// Prompt, extract the script, run it in the sandbox and check the produced
/// CSV has exactly n_samples rows. Failures are fed back to the model up to
/// max_retries attempts in total. Each attempt gets a fresh scratch
/// directory under `scratch_root`.
inline GenerationOutcome run_generation_agent(const GenerationTask& task, const modelgw::Gateway& gateway,
                                              Sandbox& sandbox, const std::filesystem::path& scratch_root) {
  task.validate();
  const std::string base_prompt = build_generation_prompt(task);
  const auto params = generation_params();
  std::vector<AttemptLog> log;
  std::string prompt = base_prompt;
  ErrorCode last_code = ErrorCode::kRetriesExhausted;
  for (int attempt = 1; attempt <= task.max_retries; ++attempt) {
    AttemptLog entry;
    entry.attempt = attempt;
    std::string reply;
    try {
      reply = gateway.chat(prompt, params);
    } catch (const Error& e) {
      entry.error = std::string(to_string(e.code())) + ": " + e.what();
      log.push_back(entry);
      last_code = ErrorCode::kRetriesExhausted;
      prompt = base_prompt + detail::retry_note(entry.error);
      continue;
    }
    const auto code = extract_code_block(reply);
    if (!code) {
      entry.error = "reply contained no fenced code block";
      log.push_back(entry);
      last_code = ErrorCode::kNoCodeBlock;
      prompt = base_prompt + detail::retry_note(entry.error);
      continue;
    }
    entry.code_found = true;
    const auto scratch = scratch_root / ("attempt-" + std::to_string(attempt));
    std::error_code ec;
    std::filesystem::remove_all(scratch, ec);
    const auto run = sandbox.run(*code, scratch, task.output_file);
    entry.exit_status = run.exit_status;
    entry.timed_out = run.timed_out;
    entry.wall_time_seconds = run.wall_time_seconds;
    last_code = ErrorCode::kRetriesExhausted;
    if (run.timed_out) {
      entry.error = "script timed out";
    } else if (run.exit_status != 0) {
      entry.error = "exit status " + std::to_string(run.exit_status) + "\n" + detail::tail(run.stderr_text);
    } else if (!run.produced_file) {
      entry.error = "script did not write " + task.output_file;
    } else {
      try {
        auto table = ingest::parse_csv(fs::read_file(*run.produced_file));
        if (table.row_count != task.n_samples) {
          entry.error = "expected " + std::to_string(task.n_samples) + " rows, got " + std::to_string(table.row_count);
        } else {
          if (task.output_path.has_parent_path()) std::filesystem::create_directories(task.output_path.parent_path());
          std::filesystem::copy_file(*run.produced_file, task.output_path,
                                     std::filesystem::copy_options::overwrite_existing);
          log.push_back(entry);
          return GenerationOutcome{task.output_path, std::move(table), std::move(log)};
        }
      } catch (const Error& e) {
        entry.error = std::string("unreadable output: ") + e.what();
      }
    }
    log.push_back(entry);
    prompt = base_prompt + detail::retry_note(entry.error);
  }
  const std::string last = log.empty() ? std::string{} : log.back().error;
  throw GenerationFailure(last_code,
                          "generation failed after " + std::to_string(task.max_retries) + " attempts: " + last,
                          std::move(log));
}

}  // namespace datascout::synthgen
