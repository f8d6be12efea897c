// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "datascout/core/stopwords.hpp"
#include "datascout/ingest/document.hpp"

namespace datascout::analyze {

inline constexpr std::size_t kDefaultTopK = 200;

/// Content-word counts, descending by count with lexicographic tie-break.
/// `total_tokens` counts every content word, including those beyond top_k.
struct WordDistribution {
  std::vector<std::pair<std::string, std::size_t>> vocabulary;
  std::size_t total_tokens = 0;
  std::size_t top_k = kDefaultTopK;
};

inline WordDistribution word_distribution(std::string_view body, std::size_t top_k = kDefaultTopK) {
  WordDistribution out;
  out.top_k = top_k;
  out.vocabulary = text::content_word_counts(body);
  for (const auto& [w, c] : out.vocabulary) out.total_tokens += c;
  if (out.vocabulary.size() > top_k) out.vocabulary.resize(top_k);
  return out;
}

inline WordDistribution word_distribution(const ingest::TextDocument& doc, std::size_t top_k = kDefaultTopK) {
  return word_distribution(doc.body, top_k);
}

}  // namespace datascout::analyze
