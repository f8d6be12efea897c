// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "datascout/core/error.hpp"
#include "datascout/core/text.hpp"

namespace datascout::ingest {

enum class FeatureKind {
  kNumericContinuous,
  kNumericDiscrete,
  kCategorical,
  kText,
  kDatetime,
  kImageReference,
};

inline std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kNumericContinuous: return "numeric-continuous";
    case FeatureKind::kNumericDiscrete: return "numeric-discrete";
    case FeatureKind::kCategorical: return "categorical";
    case FeatureKind::kText: return "text";
    case FeatureKind::kDatetime: return "datetime";
    case FeatureKind::kImageReference: return "image-reference";
  }
  return "categorical";
}

inline FeatureKind feature_kind_from_string(std::string_view s) {
  for (auto k : {FeatureKind::kNumericContinuous, FeatureKind::kNumericDiscrete, FeatureKind::kCategorical,
                 FeatureKind::kText, FeatureKind::kDatetime, FeatureKind::kImageReference}) {
    if (to_string(k) == s) return k;
  }
  fail(ErrorCode::kParseError, "unknown feature kind " + std::string(s));
}

inline bool is_numeric(FeatureKind kind) {
  return kind == FeatureKind::kNumericContinuous || kind == FeatureKind::kNumericDiscrete;
}

/// A missing cell is std::nullopt.
using Cell = std::optional<std::string>;

struct Column {
  std::string name;
  FeatureKind kind = FeatureKind::kCategorical;
  std::vector<Cell> values;

  /// Numeric view; non-numeric or missing cells map to nullopt.
  std::vector<std::optional<double>> numbers() const {
    std::vector<std::optional<double>> out;
    out.reserve(values.size());
    for (const auto& v : values) {
      double d = 0;
      if (v && text::parse_double(*v, d)) {
        out.emplace_back(d);
      } else {
        out.emplace_back(std::nullopt);
      }
    }
    return out;
  }

  /// Finite numeric values with missing cells dropped.
  std::vector<double> finite_numbers() const {
    std::vector<double> out;
    for (const auto& v : numbers()) {
      if (v) out.push_back(*v);
    }
    return out;
  }
};

/// Columnar table; every column holds exactly row_count cells.
struct CanonicalTable {
  std::vector<Column> columns;
  std::size_t row_count = 0;

  const Column* find(std::string_view name) const {
    for (const auto& c : columns) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }

  std::vector<std::string> column_names() const {
    std::vector<std::string> out;
    for (const auto& c : columns) out.push_back(c.name);
    return out;
  }

  void validate() const {
    std::unordered_set<std::string> seen;
    for (const auto& c : columns) {
      require(c.values.size() == row_count, ErrorCode::kParseError,
              "column " + c.name + " has " + std::to_string(c.values.size()) + " values, expected " +
                  std::to_string(row_count));
      require(seen.insert(c.name).second, ErrorCode::kParseError, "duplicate column " + c.name);
    }
  }

  /// First `n` rows starting at `offset`, clipped to the table.
  CanonicalTable slice(std::size_t offset, std::size_t n) const {
    CanonicalTable out;
    const std::size_t begin = std::min(offset, row_count);
    const std::size_t end = std::min(row_count, begin + n);
    out.row_count = end - begin;
    for (const auto& c : columns) {
      Column col{c.name, c.kind, {}};
      col.values.assign(c.values.begin() + static_cast<std::ptrdiff_t>(begin),
                        c.values.begin() + static_cast<std::ptrdiff_t>(end));
      out.columns.push_back(std::move(col));
    }
    return out;
  }
};

/// Renames duplicates to name_2, name_3, ... in order of appearance; empty
/// names become column_<position>.
inline std::vector<std::string> unique_column_names(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  std::set<std::string> used;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    std::string base(text::trim(raw[i]));
    if (base.empty()) base = "column_" + std::to_string(i + 1);
    std::string name = base;
    for (int suffix = 2; used.count(name); ++suffix) name = base + "_" + std::to_string(suffix);
    used.insert(name);
    out.push_back(name);
  }
  return out;
}

}  // namespace datascout::ingest
