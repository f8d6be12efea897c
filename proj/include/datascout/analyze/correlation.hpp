// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "datascout/core/error.hpp"
#include "datascout/ingest/table.hpp"

namespace datascout::analyze {

/// Symmetric Pearson matrix over the numeric columns, unit diagonal.
struct CorrelationMatrix {
  std::vector<std::string> feature_names;
  std::vector<double> values;  // row-major, size n*n
  std::vector<std::pair<std::string, std::string>> undefined_pairs;

  std::size_t size() const { return feature_names.size(); }
  double at(std::size_t i, std::size_t j) const { return values[i * size() + j]; }

  /// Off-diagonal pairs sorted by descending |r|, ties by name.
  std::vector<std::pair<std::pair<std::string, std::string>, double>> top_pairs(std::size_t k) const {
    std::vector<std::pair<std::pair<std::string, std::string>, double>> pairs;
    for (std::size_t i = 0; i < size(); ++i) {
      for (std::size_t j = i + 1; j < size(); ++j) pairs.push_back({{feature_names[i], feature_names[j]}, at(i, j)});
    }
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const auto& a, const auto& b) { return std::abs(a.second) > std::abs(b.second); });
    if (pairs.size() > k) pairs.resize(k);
    return pairs;
  }
};

inline constexpr std::size_t kMinCorrelationRows = 3;

/// Pearson r over rows where both values are present. Returns nullopt when
/// fewer than three such rows exist or either side has zero variance.
inline std::optional<double> pearson(const std::vector<std::optional<double>>& x,
                                     const std::vector<std::optional<double>>& y) {
  std::vector<std::pair<double, double>> rows;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (x[i] && y[i]) rows.emplace_back(*x[i], *y[i]);
  }
  if (rows.size() < kMinCorrelationRows) return std::nullopt;
  double mx = 0, my = 0;
  for (auto [a, b] : rows) {
    mx += a;
    my += b;
  }
  mx /= static_cast<double>(rows.size());
  my /= static_cast<double>(rows.size());
  double sxy = 0, sxx = 0, syy = 0;
  for (auto [a, b] : rows) {
    sxy += (a - mx) * (b - my);
    sxx += (a - mx) * (a - mx);
    syy += (b - my) * (b - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline CorrelationMatrix feature_correlations(const ingest::CanonicalTable& table) {
  std::vector<const ingest::Column*> numeric;
  for (const auto& c : table.columns) {
    if (ingest::is_numeric(c.kind)) numeric.push_back(&c);
  }
  require(!numeric.empty(), ErrorCode::kNoNumericColumns, "table has no numeric columns");
  require(numeric.size() >= 2, ErrorCode::kNoNumericColumns, "correlations need at least two numeric columns");

  CorrelationMatrix m;
  const std::size_t n = numeric.size();
  std::vector<std::vector<std::optional<double>>> cols;
  for (const auto* c : numeric) {
    m.feature_names.push_back(c->name);
    cols.push_back(c->numbers());
  }
  m.values.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    m.values[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto r = pearson(cols[i], cols[j]);
      if (!r) m.undefined_pairs.emplace_back(m.feature_names[i], m.feature_names[j]);
      m.values[i * n + j] = m.values[j * n + i] = r.value_or(0.0);
    }
  }
  return m;
}

}  // namespace datascout::analyze
