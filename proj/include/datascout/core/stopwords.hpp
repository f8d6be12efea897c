// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "datascout/core/text.hpp"

namespace datascout::text {

/// English function words dropped from word distributions and keyword
/// extraction. Tokens shorter than three characters are dropped separately,
/// so the list only carries words of length three or more.
inline const std::unordered_set<std::string_view>& stop_words() {
  static const std::unordered_set<std::string_view> kWords = {
      "about", "above", "after", "again", "against", "all", "also", "although", "among", "and",
      "another", "any", "are", "around", "because", "been", "before", "being", "below", "between",
      "both", "but", "can", "cannot", "could", "did", "does", "doing", "done", "down",
      "during", "each", "either", "else", "etc", "even", "ever", "every", "few", "for",
      "from", "further", "had", "has", "have", "having", "hence", "her", "here", "hers",
      "herself", "him", "himself", "his", "how", "however", "into", "its", "itself", "just",
      "least", "less", "let", "many", "may", "might", "more", "most", "much", "must",
      "neither", "nor", "not", "now", "off", "often", "once", "one", "only", "onto",
      "other", "others", "otherwise", "our", "ours", "ourselves", "out", "over", "own", "per",
      "perhaps", "quite", "rather", "same", "several", "shall", "she", "should", "since", "some",
      "such", "than", "that", "the", "their", "theirs", "them", "themselves", "then", "there",
      "therefore", "these", "they", "this", "those", "though", "through", "thus", "too", "toward",
      "towards", "under", "until", "upon", "use", "used", "using", "very", "via", "was",
      "way", "well", "were", "what", "whatever", "when", "where", "whereas", "whether", "which",
      "while", "who", "whom", "whose", "why", "will", "with", "within", "without", "would",
      "yet", "you", "your", "yours", "yourself", "yourselves", "able", "already", "always", "anything",
  };
  return kWords;
}

inline bool is_stop_word(std::string_view w) { return stop_words().count(w) > 0; }

/// Content-word counts: lowercase alphanumeric runs of length >= 3 that are
/// not stop words, sorted by descending count then lexicographically.
inline std::vector<std::pair<std::string, std::size_t>> content_word_counts(std::string_view body) {
  std::map<std::string, std::size_t> counts;
  for (auto& w : words(body)) {
    if (w.size() < 3 || is_stop_word(w)) continue;
    ++counts[std::move(w)];
  }
  std::vector<std::pair<std::string, std::size_t>> out(counts.begin(), counts.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

}  // namespace datascout::text
