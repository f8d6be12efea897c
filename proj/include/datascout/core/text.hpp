// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "datascout/core/error.hpp"

namespace datascout::text {

/// Byte range [begin, end) of one token inside a string.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

inline bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

inline bool is_space_byte(unsigned char c) { return std::isspace(c) != 0; }

/// Approximate tokenizer shared by the gateway budget checks, chunking and
/// length statistics: every maximal run of word bytes (ASCII alphanumerics
/// and any non-ASCII byte) is one token, every other non-space byte is one
/// token on its own.
inline std::vector<TokenSpan> tokenize(std::string_view s) {
  std::vector<TokenSpan> spans;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (is_space_byte(c)) {
      ++i;
    } else if (is_word_byte(c)) {
      std::size_t j = i + 1;
      while (j < s.size() && is_word_byte(static_cast<unsigned char>(s[j]))) ++j;
      spans.push_back({i, j});
      i = j;
    } else {
      spans.push_back({i, i + 1});
      ++i;
    }
  }
  return spans;
}

inline std::size_t count_tokens(std::string_view s) {
  std::size_t n = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (is_space_byte(c)) {
      ++i;
      continue;
    }
    ++n;
    if (is_word_byte(c)) {
      while (i < s.size() && is_word_byte(static_cast<unsigned char>(s[i]))) ++i;
    } else {
      ++i;
    }
  }
  return n;
}

/// Lowercased alphanumeric runs; non-ASCII bytes act as separators.
inline std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space_byte(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && is_space_byte(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  return true;
}

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

inline std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto nl = s.find('\n', start);
    if (nl == std::string_view::npos) nl = s.size();
    std::string_view line = s.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.emplace_back(line);
    start = nl + 1;
  }
  return out;
}

inline void replace_all(std::string& s, std::string_view from, std::string_view to) {
  if (from.empty()) return;
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

/// Sentence splitter used by the extractive stubs. Line breaks always end a
/// sentence; within a line, '.', '!' or '?' followed by whitespace or end of
/// line does. Leading bullet markers are stripped.
inline std::vector<std::string> sentences(std::string_view s) {
  std::vector<std::string> out;
  auto flush = [&](std::string_view piece) {
    piece = trim(piece);
    while (!piece.empty() && (piece.front() == '-' || piece.front() == '*')) {
      piece.remove_prefix(1);
      piece = trim(piece);
    }
    if (!piece.empty()) out.emplace_back(piece);
  };
  for (const auto& line : split_lines(s)) {
    std::string_view v = line;
    std::size_t start = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const char c = v[i];
      if ((c == '.' || c == '!' || c == '?') &&
          (i + 1 == v.size() || is_space_byte(static_cast<unsigned char>(v[i + 1])))) {
        flush(v.substr(start, i + 1 - start));
        start = i + 1;
      }
    }
    if (start < v.size()) flush(v.substr(start));
  }
  return out;
}

/// Shortest round-trip decimal representation.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Fixed-precision rendering for human-facing summaries.
inline std::string format_fixed(double v, int precision = 4) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, precision);
  return std::string(buf, res.ptr);
}

/// Parses a full string as a finite double (no trailing garbage).
inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

inline bool parse_integer(std::string_view s, long long& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

inline bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xe ? 3 : (c >> 3) == 0x1e ? 4 : 0;
    if (len == 0 || i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) & 0xc0) != 0x80) return false;
    }
    i += len;
  }
  return true;
}

inline std::string nfc(std::string_view s) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  require(U_SUCCESS(status), ErrorCode::kExtractionFailure, "NFC normalizer unavailable");
  icu::UnicodeString in = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  icu::UnicodeString out = norm->normalize(in, status);
  require(U_SUCCESS(status), ErrorCode::kExtractionFailure, "NFC normalization failed");
  std::string result;
  out.toUTF8String(result);
  return result;
}

/// Runs of whitespace become a single space; leading/trailing whitespace dropped.
inline std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char ch : s) {
    if (is_space_byte(static_cast<unsigned char>(ch))) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(ch);
    }
  }
  return out;
}

/// Keeps the head and tail halves of a token sequence when it exceeds the cap.
inline std::string truncate_tokens(std::string_view s, std::size_t max_tokens) {
  auto spans = tokenize(s);
  if (spans.size() <= max_tokens) return std::string(s);
  if (max_tokens == 0) return {};
  const std::size_t head = (max_tokens + 1) / 2;
  const std::size_t tail = max_tokens - head;
  std::string out(s.substr(0, spans[head - 1].end));
  out += "\n[...]\n";
  if (tail > 0) out += s.substr(spans[spans.size() - tail].begin);
  return out;
}

}  // namespace datascout::text
