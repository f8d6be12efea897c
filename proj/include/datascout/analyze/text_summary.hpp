// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "datascout/core/error.hpp"
#include "datascout/core/text.hpp"
#include "datascout/ingest/document.hpp"
#include "datascout/modelgw.hpp"
#include "datascout/prompts.hpp"

namespace datascout::analyze {

/// Largest payload, in tokens, that fits next to `instruction` in one prompt.
inline std::size_t payload_budget(const modelgw::Gateway& gateway, std::string_view instruction) {
  const std::size_t budget = gateway.config().context_budget_tokens;
  const std::size_t overhead = text::count_tokens(instruction);
  return budget > overhead ? budget - overhead : 1;
}

/// Consecutive non-overlapping token windows covering `body`.
inline std::vector<std::string> split_windows(std::string_view body, std::size_t window_tokens) {
  require(window_tokens > 0, ErrorCode::kInvalidArgument, "window size must be positive");
  const auto spans = text::tokenize(body);
  std::vector<std::string> out;
  for (std::size_t start = 0; start < spans.size(); start += window_tokens) {
    const std::size_t end = std::min(spans.size(), start + window_tokens);
    out.emplace_back(body.substr(spans[start].begin, spans[end - 1].end - spans[start].begin));
  }
  if (out.empty()) out.emplace_back();
  return out;
}

/// Reduces `parts` with `instruction` prompts. Parts are packed greedily into
/// prompts that fit the budget; when more than one prompt is needed the
/// partial results are reduced again.
inline std::string reduce_texts(const std::vector<std::string>& parts, const modelgw::Gateway& gateway,
                                std::string_view instruction, int depth = 0) {
  require(!parts.empty(), ErrorCode::kPrecondition, "nothing to reduce");
  const std::size_t budget = payload_budget(gateway, instruction);
  std::vector<std::string> groups;
  std::string current;
  std::size_t current_tokens = 0;
  for (const auto& part : parts) {
    std::string piece = text::count_tokens(part) > budget ? text::truncate_tokens(part, budget > 5 ? budget - 5 : 1) : part;
    const std::size_t t = text::count_tokens(piece);
    if (!current.empty() && current_tokens + t > budget) {
      groups.push_back(std::move(current));
      current.clear();
      current_tokens = 0;
    }
    if (!current.empty()) current += "\n";
    current += piece;
    current_tokens += t;
  }
  if (!current.empty() || groups.empty()) groups.push_back(std::move(current));

  std::vector<std::string> reduced;
  for (const auto& g : groups) reduced.push_back(gateway.chat(std::string(instruction) + g));
  if (reduced.size() == 1) return reduced.front();
  if (depth >= 3) {
    return text::truncate_tokens(text::join(reduced, "\n"), budget > 5 ? budget - 5 : 1);
  }
  return reduce_texts(reduced, gateway, instruction, depth + 1);
}

struct TextSummary {
  std::string text;
  bool available = true;
  std::size_t windows = 0;
  std::string note;
};

/// Bullet-point summary. Bodies longer than one prompt are split into
/// windows, each summarised, and the window summaries merged by a final call.
/// Gateway failures leave the summary unavailable instead of throwing.
inline TextSummary summarize_text(const ingest::TextDocument& doc, const modelgw::Gateway& gateway,
                                  std::size_t window_tokens = 0) {
  TextSummary out;
  const std::size_t window =
      window_tokens > 0 ? window_tokens : payload_budget(gateway, prompts::kSummarizeText);
  try {
    const auto windows = split_windows(doc.body, window);
    out.windows = windows.size();
    std::vector<std::string> partial;
    for (const auto& w : windows) partial.push_back(gateway.chat(std::string(prompts::kSummarizeText) + w));
    out.text = partial.size() == 1 ? partial.front() : reduce_texts(partial, gateway, prompts::kMergeText);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kGatewayFailure && e.code() != ErrorCode::kOverBudget) throw;
    out.text.clear();
    out.available = false;
    out.note = std::string("summary-unavailable: ") + e.what();
  }
  return out;
}

}  // namespace datascout::analyze
