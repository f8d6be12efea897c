// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "datascout/core/error.hpp"
#include "datascout/core/text.hpp"
#include "datascout/ingest/tabular.hpp"
#include "datascout/modelgw.hpp"
#include "datascout/prompts.hpp"
#include "datascout/ragindex.hpp"

namespace datascout::evalsuite {

// ---------------------------------------------------------------------------
// Question generation

struct RetrievalQuestion {
  std::string question_text;
  std::string source_record_id;
};

struct QuestionSet {
  std::vector<RetrievalQuestion> questions;
  std::size_t requested = 0;
  bool under_count = false;
};

inline constexpr std::size_t kDefaultQuestionCount = 15;

/// Items of numbered ("1.", "2)") or bulleted ("-", "*") lines.
inline std::vector<std::string> parse_list_items(std::string_view reply) {
  std::vector<std::string> out;
  for (const auto& raw : text::split_lines(reply)) {
    auto line = text::trim(raw);
    std::size_t i = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
      line.remove_prefix(i + 1);
    } else if (!line.empty() && (line.front() == '-' || line.front() == '*')) {
      line.remove_prefix(1);
    } else if (line.substr(0, 3) == "\xE2\x80\xA2") {
      line.remove_prefix(3);
    } else {
      continue;
    }
    line = text::trim(line);
    if (!line.empty()) out.emplace_back(line);
  }
  return out;
}

inline std::string question_prompt(std::string_view summary, std::size_t n) {
  std::string prompt(prompts::kQuestionGeneration);
  text::replace_all(prompt, "{text}", summary);
  if (n != kDefaultQuestionCount) text::replace_all(prompt, "list of 15 questions", "list of " + std::to_string(n) + " questions");
  return prompt;
}

inline QuestionSet generate_questions(std::string_view paper_summary, const modelgw::Gateway& gateway,
                                      std::string source_record_id, std::size_t n = kDefaultQuestionCount) {
  require(!text::trim(paper_summary).empty(), ErrorCode::kPrecondition, "paper summary must be non-empty");
  require(!source_record_id.empty(), ErrorCode::kPrecondition, "source record id must be non-empty");
  QuestionSet out;
  out.requested = n;
  for (auto& q : parse_list_items(gateway.chat(question_prompt(paper_summary, n)))) {
    if (out.questions.size() == n) break;
    out.questions.push_back({std::move(q), source_record_id});
  }
  out.under_count = out.questions.size() < n;
  return out;
}

/// [{"question": ..., "source_record_id": ...}, ...]
inline nlohmann::json questions_to_json(const std::vector<RetrievalQuestion>& questions) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& q : questions) arr.push_back({{"question", q.question_text}, {"source_record_id", q.source_record_id}});
  return arr;
}

inline std::vector<RetrievalQuestion> questions_from_json(const nlohmann::json& j) {
  require(j.is_array(), ErrorCode::kParseError, "question file must hold a JSON array");
  std::vector<RetrievalQuestion> out;
  for (const auto& q : j) {
    require(q.is_object() && q.contains("question") && q.contains("source_record_id"), ErrorCode::kParseError,
            "question entries need question and source_record_id");
    out.push_back({q["question"].get<std::string>(), q["source_record_id"].get<std::string>()});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Entropy

inline constexpr std::size_t kEntropyWindow = 10;

/// Shannon entropy of the id distribution with p_i = count_i / L, divided by
/// ln 10.
inline double id_entropy(const std::vector<std::string>& ids) {
  if (ids.empty()) return 0.0;
  std::map<std::string, std::size_t> counts;
  for (const auto& id : ids) ++counts[id];
  const double total = static_cast<double>(ids.size());
  double h = 0.0;
  for (const auto& [id, c] : counts) {
    const double p = static_cast<double>(c) / total;
    h -= p * std::log(p);
  }
  return std::clamp(h / std::log(10.0), 0.0, 1.0);
}

inline double normalized_entropy(const std::vector<std::string>& retrieved_ids) {
  require(retrieved_ids.size() == kEntropyWindow, ErrorCode::kWrongLength,
          "expected exactly 10 ids, got " + std::to_string(retrieved_ids.size()));
  return id_entropy(retrieved_ids);
}

// ---------------------------------------------------------------------------
// Retrieval experiment

struct QuestionOutcome {
  std::string question;
  std::string source_record_id;
  std::optional<std::size_t> hit_rank;  // 1-based
  double normalized_entropy = 0.0;
  std::vector<std::string> retrieved;  // record ids, best first
};

struct RetrievalMetrics {
  std::size_t n_questions = 0;
  double top1 = 0.0;
  double top5 = 0.0;
  double top10 = 0.0;
  std::map<std::size_t, double> hit_rates;  // every requested k
  std::vector<QuestionOutcome> per_question;
};

struct RetrievalOptions {
  std::vector<std::size_t> k_list = {1, 5, 10};
  bool include_file_entries = false;  // file entries count for their owning record
};

inline RetrievalMetrics retrieval_experiment(const std::vector<RetrievalQuestion>& questions,
                                             const ragindex::VectorIndex& index, const modelgw::Gateway& gateway,
                                             const RetrievalOptions& options = {}) {
  require(!index.empty(), ErrorCode::kEmptyIndex, "index is empty");
  require(!questions.empty(), ErrorCode::kPrecondition, "no questions");
  const auto filter = options.include_file_entries ? ragindex::LevelFilter::kAny : ragindex::LevelFilter::kRecord;
  std::size_t depth = kEntropyWindow;
  for (auto k : options.k_list) depth = std::max(depth, k);
  RetrievalMetrics m;
  m.n_questions = questions.size();
  for (const auto& q : questions) {
    QuestionOutcome o{q.question_text, q.source_record_id, std::nullopt, 0.0, {}};
    for (const auto& s : ragindex::query(index, q.question_text, depth, gateway, filter)) o.retrieved.push_back(s.record_id);
    for (std::size_t r = 0; r < o.retrieved.size(); ++r) {
      if (o.retrieved[r] == q.source_record_id) {
        o.hit_rank = r + 1;
        break;
      }
    }
    std::vector<std::string> window(o.retrieved.begin(),
                                    o.retrieved.begin() + static_cast<std::ptrdiff_t>(std::min(kEntropyWindow, o.retrieved.size())));
    o.normalized_entropy = id_entropy(window);
    m.per_question.push_back(std::move(o));
  }
  auto rate = [&](std::size_t k) {
    std::size_t hits = 0;
    for (const auto& o : m.per_question) hits += o.hit_rank && *o.hit_rank <= k;
    return static_cast<double>(hits) / static_cast<double>(m.per_question.size());
  };
  for (auto k : options.k_list) m.hit_rates[k] = rate(k);
  m.top1 = rate(1);
  m.top5 = rate(5);
  m.top10 = rate(10);
  return m;
}

/// One row per question, sorted by increasing entropy (stable), with
/// per-question hits and the running hit rates.
struct CurvePoint {
  std::size_t rank = 0;
  double entropy = 0.0;
  bool hit1 = false, hit5 = false, hit10 = false;
  double cum1 = 0.0, cum5 = 0.0, cum10 = 0.0;
};

inline std::vector<CurvePoint> entropy_curve(const RetrievalMetrics& m) {
  std::vector<std::size_t> order(m.per_question.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return m.per_question[a].normalized_entropy < m.per_question[b].normalized_entropy;
  });
  std::vector<CurvePoint> out;
  std::size_t h1 = 0, h5 = 0, h10 = 0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto& o = m.per_question[order[r]];
    CurvePoint p;
    p.rank = r + 1;
    p.entropy = o.normalized_entropy;
    p.hit1 = o.hit_rank && *o.hit_rank <= 1;
    p.hit5 = o.hit_rank && *o.hit_rank <= 5;
    p.hit10 = o.hit_rank && *o.hit_rank <= 10;
    h1 += p.hit1;
    h5 += p.hit5;
    h10 += p.hit10;
    const double n = static_cast<double>(r + 1);
    p.cum1 = static_cast<double>(h1) / n;
    p.cum5 = static_cast<double>(h5) / n;
    p.cum10 = static_cast<double>(h10) / n;
    out.push_back(p);
  }
  return out;
}

inline std::string entropy_curve_csv(const RetrievalMetrics& m) {
  std::ostringstream out;
  out << "rank_by_entropy,entropy,hit_top1,hit_top5,hit_top10,cum_top1,cum_top5,cum_top10\n";
  for (const auto& p : entropy_curve(m)) {
    out << p.rank << ',' << text::format_double(p.entropy) << ',' << p.hit1 << ',' << p.hit5 << ',' << p.hit10 << ','
        << text::format_double(p.cum1) << ',' << text::format_double(p.cum5) << ',' << text::format_double(p.cum10)
        << '\n';
  }
  return out.str();
}

inline nlohmann::json to_json(const RetrievalMetrics& m) {
  nlohmann::json j = {{"n_questions", m.n_questions}, {"top1", m.top1}, {"top5", m.top5}, {"top10", m.top10}};
  j["hit_rates"] = nlohmann::json::object();
  for (const auto& [k, v] : m.hit_rates) j["hit_rates"][std::to_string(k)] = v;
  j["per_question"] = nlohmann::json::array();
  for (const auto& o : m.per_question) {
    j["per_question"].push_back({{"question", o.question},
                                 {"source_record_id", o.source_record_id},
                                 {"hit_rank", o.hit_rank ? nlohmann::json(*o.hit_rank) : nlohmann::json(nullptr)},
                                 {"normalized_entropy", o.normalized_entropy},
                                 {"retrieved", o.retrieved}});
  }
  return j;
}

// ---------------------------------------------------------------------------
// Histogram helpers

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::size_t> counts;
  std::size_t outside = 0;
};

/// Equal-width bins over [lo, hi]; the top edge belongs to the last bin and
/// values outside the range are counted separately.
inline Histogram histogram(const std::vector<double>& values, std::size_t bins, double lo, double hi) {
  require(bins >= 1, ErrorCode::kInvalidArgument, "bins must be >= 1");
  require(lo <= hi, ErrorCode::kInvalidArgument, "histogram range is inverted");
  Histogram h{lo, hi, std::vector<std::size_t>(bins, 0), 0};
  for (double x : values) {
    if (!(x >= lo && x <= hi)) {
      ++h.outside;
      continue;
    }
    std::size_t b = 0;
    if (hi > lo) {
      b = static_cast<std::size_t>(std::floor((x - lo) / (hi - lo) * static_cast<double>(bins)));
      b = std::min(b, bins - 1);
    }
    ++h.counts[b];
  }
  return h;
}

struct OverlapScore {
  std::string feature_name;
  double percent = 0.0;
  std::size_t bins = 0;
  double lo = 0.0;
  double hi = 0.0;
};

inline constexpr std::size_t kDefaultOverlapBins = 20;

/// 100 * sum_b min(p_b, q_b) where p and q are bin counts divided by the
/// full sample sizes, so out-of-range values lower the in-range mass. The
/// range defaults to the real data's [min, max].
inline OverlapScore histogram_overlap(const std::vector<double>& real_values, const std::vector<double>& synth_values,
                                      std::size_t bins = kDefaultOverlapBins,
                                      std::optional<std::pair<double, double>> range = std::nullopt,
                                      std::string feature_name = {}) {
  require(!real_values.empty() && !synth_values.empty(), ErrorCode::kEmptyInput, "histogram overlap of empty input");
  double lo, hi;
  if (range) {
    std::tie(lo, hi) = *range;
  } else {
    const auto [mn, mx] = std::minmax_element(real_values.begin(), real_values.end());
    lo = *mn;
    hi = *mx;
  }
  const auto p = histogram(real_values, bins, lo, hi);
  const auto q = histogram(synth_values, bins, lo, hi);
  // exact integer arithmetic: min(c_p / n_p, c_q / n_q) = min(c_p n_q, c_q n_p) / (n_p n_q)
  const unsigned __int128 np = real_values.size(), nq = synth_values.size();
  unsigned __int128 shared = 0;
  for (std::size_t b = 0; b < bins; ++b) {
    shared += std::min(static_cast<unsigned __int128>(p.counts[b]) * nq, static_cast<unsigned __int128>(q.counts[b]) * np);
  }
  OverlapScore out{std::move(feature_name), 0.0, bins, lo, hi};
  const unsigned __int128 total = np * nq;
  out.percent = shared == total ? 100.0 : 100.0 * static_cast<double>(shared) / static_cast<double>(total);
  return out;
}

// ---------------------------------------------------------------------------
// Redundancy

struct RedundancyPair {
  std::string description;
  std::string paper_text;
};

struct RedundancyResult {
  std::vector<double> similarities;       // |cosine| per kept pair
  std::vector<std::size_t> kept;          // input index of each similarity
  std::vector<std::size_t> skipped;       // pairs with an empty side
  std::vector<std::size_t> histogram;     // 10 bins over [0, 1]
};

inline constexpr std::size_t kRedundancyBins = 10;

inline RedundancyResult redundancy_similarities(const std::vector<RedundancyPair>& pairs,
                                                const modelgw::Gateway& gateway,
                                                const ragindex::ChunkOptions& chunks = {}) {
  RedundancyResult out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (text::trim(pairs[i].description).empty() || text::trim(pairs[i].paper_text).empty()) {
      out.skipped.push_back(i);
      continue;
    }
    const auto a = ragindex::chunk_average(pairs[i].description, gateway, chunks);
    const auto b = ragindex::chunk_average(pairs[i].paper_text, gateway, chunks);
    out.similarities.push_back(std::abs(ragindex::cosine(a.vector, b.vector)));
    out.kept.push_back(i);
  }
  out.histogram = histogram(out.similarities, kRedundancyBins, 0.0, 1.0).counts;
  return out;
}

inline nlohmann::json to_json(const RedundancyResult& r) {
  return {{"similarities", r.similarities}, {"kept", r.kept}, {"skipped", r.skipped}, {"histogram", r.histogram},
          {"bin_edges", [] {
             std::vector<double> e;
             for (std::size_t b = 0; b <= kRedundancyBins; ++b) e.push_back(static_cast<double>(b) / kRedundancyBins);
             return e;
           }()}};
}

// ---------------------------------------------------------------------------
// Description lengths

struct SourceLengths {
  std::string source;
  std::size_t count = 0;
  double mean_chars = 0.0;
  double median_chars = 0.0;
  double mean_tokens = 0.0;
  double median_tokens = 0.0;
  std::vector<std::size_t> chars;
  std::vector<std::size_t> tokens;
};

struct LengthStats {
  std::vector<SourceLengths> sources;
  std::optional<double> char_ratio;   // generated over original mean chars
  std::optional<double> token_ratio;  // generated over original mean tokens
};

namespace detail {

inline double mean_of(const std::vector<std::size_t>& v) {
  double s = 0.0;
  for (auto x : v) s += static_cast<double>(x);
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double median_of(std::vector<std::size_t> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? static_cast<double>(v[m]) : 0.5 * static_cast<double>(v[m - 1] + v[m]);
}

inline SourceLengths lengths_of(std::string source, const std::vector<std::string>& texts) {
  SourceLengths s;
  s.source = std::move(source);
  s.count = texts.size();
  for (const auto& t : texts) {
    s.chars.push_back(t.size());
    s.tokens.push_back(text::count_tokens(t));
  }
  s.mean_chars = mean_of(s.chars);
  s.median_chars = median_of(s.chars);
  s.mean_tokens = mean_of(s.tokens);
  s.median_tokens = median_of(s.tokens);
  return s;
}

}  // namespace detail

/// Character and token statistics of generated and original descriptions.
/// Sources with no texts are left out of the table.
inline LengthStats description_length_stats(const std::vector<std::string>& generated,
                                            const std::vector<std::string>& originals) {
  LengthStats out;
  if (!generated.empty()) out.sources.push_back(detail::lengths_of("generated", generated));
  if (!originals.empty()) out.sources.push_back(detail::lengths_of("original", originals));
  if (!generated.empty() && !originals.empty()) {
    const auto& g = out.sources[0];
    const auto& o = out.sources[1];
    if (o.mean_chars > 0) out.char_ratio = g.mean_chars / o.mean_chars;
    if (o.mean_tokens > 0) out.token_ratio = g.mean_tokens / o.mean_tokens;
  }
  return out;
}

inline nlohmann::json to_json(const LengthStats& s) {
  nlohmann::json j = {{"sources", nlohmann::json::array()}};
  for (const auto& src : s.sources) {
    j["sources"].push_back({{"source", src.source},
                            {"count", src.count},
                            {"mean_chars", src.mean_chars},
                            {"median_chars", src.median_chars},
                            {"mean_tokens", src.mean_tokens},
                            {"median_tokens", src.median_tokens},
                            {"chars", src.chars},
                            {"tokens", src.tokens}});
  }
  j["char_ratio"] = s.char_ratio ? nlohmann::json(*s.char_ratio) : nlohmann::json(nullptr);
  j["token_ratio"] = s.token_ratio ? nlohmann::json(*s.token_ratio) : nlohmann::json(nullptr);
  return j;
}

/// Long-format series for length histograms: source,chars,tokens.
inline std::string length_series_csv(const LengthStats& s) {
  std::ostringstream out;
  out << "source,chars,tokens\n";
  for (const auto& src : s.sources) {
    for (std::size_t i = 0; i < src.chars.size(); ++i) out << src.source << ',' << src.chars[i] << ',' << src.tokens[i] << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Cross-dataset similarity

struct SimilarityMatrix {
  std::vector<std::string> ids;
  std::vector<double> values;  // row-major

  double at(std::size_t i, std::size_t j) const { return values[i * ids.size() + j]; }

  /// Mean of the off-diagonal entries.
  double mean_offdiagonal() const {
    const std::size_t n = ids.size();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j) s += at(i, j);
      }
    }
    return n > 1 ? s / static_cast<double>(n * (n - 1)) : 0.0;
  }
};

inline SimilarityMatrix cross_dataset_similarity(const std::vector<ragindex::IndexEntry>& entries) {
  require(entries.size() >= 2, ErrorCode::kTooFewEntries, "need at least two entries");
  SimilarityMatrix m;
  const std::size_t n = entries.size();
  for (const auto& e : entries) m.ids.push_back(e.entry_id);
  m.values.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    m.values[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      m.values[i * n + j] = m.values[j * n + i] = ragindex::cosine(entries[i].vector, entries[j].vector);
    }
  }
  return m;
}

/// Heat-map data: header row of ids, then one row per id.
inline std::string similarity_csv(const SimilarityMatrix& m) {
  std::ostringstream out;
  out << "id";
  for (const auto& id : m.ids) out << ',' << ingest::csv::quote(id);
  out << '\n';
  for (std::size_t i = 0; i < m.ids.size(); ++i) {
    out << ingest::csv::quote(m.ids[i]);
    for (std::size_t j = 0; j < m.ids.size(); ++j) out << ',' << text::format_double(m.at(i, j));
    out << '\n';
  }
  return out.str();
}

}  // namespace datascout::evalsuite
