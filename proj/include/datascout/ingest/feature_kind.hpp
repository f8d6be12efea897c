// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <array>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "datascout/core/text.hpp"
#include "datascout/ingest/table.hpp"

namespace datascout::ingest {

struct KindThresholds {
  std::size_t discrete_max_distinct = 20;
  double categorical_max_ratio = 0.5;
  std::size_t categorical_max_distinct = 1000;
  double text_min_mean_length = 50.0;
};

/// Empty string, NA, NaN and null (any case) are missing values.
inline bool is_null_token(std::string_view s) {
  const auto t = text::trim(s);
  return t.empty() || text::to_lower(t) == "na" || text::to_lower(t) == "nan" || text::to_lower(t) == "null";
}

namespace detail {

inline bool digits(std::string_view s, std::size_t pos, std::size_t n, int& value) {
  if (pos + n > s.size()) return false;
  value = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    value = value * 10 + (s[i] - '0');
  }
  return true;
}

}  // namespace detail

/// ISO-8601 calendar date with optional time and zone:
/// YYYY-MM-DD[(T| )hh:mm[:ss[.fff]][Z|(+|-)hh:mm]]
inline bool is_iso8601(std::string_view s) {
  s = text::trim(s);
  int year = 0, month = 0, day = 0;
  if (!detail::digits(s, 0, 4, year) || s.size() < 10 || s[4] != '-' || s[7] != '-') return false;
  if (!detail::digits(s, 5, 2, month) || !detail::digits(s, 8, 2, day)) return false;
  static constexpr std::array<int, 12> kDays{31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month < 1 || month > 12 || day < 1 || day > kDays[static_cast<std::size_t>(month - 1)]) return false;
  if (month == 2 && day == 29 && !((year % 4 == 0 && year % 100 != 0) || year % 400 == 0)) return false;
  if (s.size() == 10) return true;
  if (s[10] != 'T' && s[10] != ' ') return false;
  int hh = 0, mm = 0, ss = 0;
  if (!detail::digits(s, 11, 2, hh) || s.size() < 16 || s[13] != ':' || !detail::digits(s, 14, 2, mm)) return false;
  if (hh > 23 || mm > 59) return false;
  std::size_t pos = 16;
  if (pos < s.size() && s[pos] == ':') {
    if (!detail::digits(s, pos + 1, 2, ss) || ss > 60) return false;
    pos += 3;
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      const std::size_t start = pos;
      while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
      if (pos == start) return false;
    }
  }
  if (pos == s.size()) return true;
  if (s[pos] == 'Z') return pos + 1 == s.size();
  if (s[pos] == '+' || s[pos] == '-') {
    int zh = 0, zm = 0;
    return s.size() == pos + 6 && detail::digits(s, pos + 1, 2, zh) && s[pos + 3] == ':' &&
           detail::digits(s, pos + 4, 2, zm) && zh <= 23 && zm <= 59;
  }
  return false;
}

inline bool has_image_extension(std::string_view s) {
  const auto lower = text::to_lower(text::trim(s));
  for (std::string_view ext : {".jpg", ".jpeg", ".png", ".tif", ".tiff", ".gif", ".bmp"}) {
    if (text::ends_with(lower, ext)) return true;
  }
  return false;
}

/// Assigns a FeatureKind from the non-missing values. Rules, first match wins:
/// dates, numbers (discrete when integral with few distinct values), low
/// cardinality categorical, long strings as text, image file names, and
/// categorical otherwise (including the all-missing case).
inline FeatureKind detect_feature_kind(const std::vector<Cell>& values, const KindThresholds& cfg = {}) {
  std::vector<std::string_view> present;
  for (const auto& v : values) {
    if (v && !is_null_token(*v)) present.emplace_back(text::trim(*v));
  }
  if (present.empty()) return FeatureKind::kCategorical;

  bool all_dates = true;
  for (auto v : present) {
    if (!is_iso8601(v)) {
      all_dates = false;
      break;
    }
  }
  if (all_dates) return FeatureKind::kDatetime;

  bool all_numbers = true;
  bool all_integers = true;
  for (auto v : present) {
    double d = 0;
    if (!text::parse_double(v, d)) {
      all_numbers = false;
      break;
    }
    long long i = 0;
    if (!text::parse_integer(v, i)) all_integers = false;
  }
  std::set<std::string_view> distinct(present.begin(), present.end());
  if (all_numbers) {
    if (all_integers) {
      std::set<long long> ints;
      for (auto v : present) {
        long long i = 0;
        text::parse_integer(v, i);
        ints.insert(i);
      }
      if (ints.size() <= cfg.discrete_max_distinct) return FeatureKind::kNumericDiscrete;
    }
    return FeatureKind::kNumericContinuous;
  }

  const double ratio = static_cast<double>(distinct.size()) / static_cast<double>(present.size());
  if (ratio <= cfg.categorical_max_ratio && distinct.size() <= cfg.categorical_max_distinct) {
    return FeatureKind::kCategorical;
  }

  std::size_t total_length = 0;
  for (auto v : present) total_length += v.size();
  if (static_cast<double>(total_length) / static_cast<double>(present.size()) > cfg.text_min_mean_length) {
    return FeatureKind::kText;
  }

  bool all_images = true;
  for (auto v : present) {
    if (!has_image_extension(v)) {
      all_images = false;
      break;
    }
  }
  if (all_images) return FeatureKind::kImageReference;
  return FeatureKind::kCategorical;
}

}  // namespace datascout::ingest
