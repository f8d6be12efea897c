// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "datascout/core/error.hpp"
#include "datascout/core/rng.hpp"
#include "datascout/ingest/table.hpp"

namespace datascout::analyze {

enum class PredictabilityMethod { kLinearR2, kClassificationUplift };

inline std::string_view to_string(PredictabilityMethod m) {
  return m == PredictabilityMethod::kLinearR2 ? "linear-r2" : "classification-uplift";
}

/// How well one column is predicted from the numeric columns, in [0, 1].
///
/// Numeric targets: 5-fold cross-validated R^2 of an OLS fit (with
/// intercept), clipped at 0. Other targets: accuracy uplift of a
/// nearest-centroid classifier over the majority-class rate,
/// (acc - base) / (1 - base), clipped at 0. This is a stand-in measure;
/// reports flag it as such.
struct PredictabilityScore {
  std::string target_feature;
  double score = 0.0;
  PredictabilityMethod method = PredictabilityMethod::kLinearR2;
};

inline constexpr std::size_t kPredictabilityFolds = 5;
inline constexpr std::size_t kPredictabilityMinRows = 10;

namespace detail {

/// Fold id per row from a seeded permutation.
inline std::vector<std::size_t> fold_assignment(std::size_t rows, std::uint64_t seed) {
  std::vector<std::size_t> order(rows);
  for (std::size_t i = 0; i < rows; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::size_t> fold(rows);
  for (std::size_t p = 0; p < rows; ++p) fold[order[p]] = p % kPredictabilityFolds;
  return fold;
}

inline double cv_r2(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::uint64_t seed) {
  const auto rows = static_cast<std::size_t>(y.size());
  const double mean = y.mean();
  const double sst = (y.array() - mean).square().sum();
  if (sst <= 0.0) return 0.0;
  const auto fold = fold_assignment(rows, seed);
  Eigen::VectorXd pred(y.size());
  for (std::size_t f = 0; f < kPredictabilityFolds; ++f) {
    std::vector<Eigen::Index> train, test;
    for (std::size_t r = 0; r < rows; ++r) (fold[r] == f ? test : train).push_back(static_cast<Eigen::Index>(r));
    if (test.empty()) continue;
    Eigen::MatrixXd a(static_cast<Eigen::Index>(train.size()), x.cols() + 1);
    Eigen::VectorXd b(static_cast<Eigen::Index>(train.size()));
    for (std::size_t k = 0; k < train.size(); ++k) {
      const auto r = train[k];
      a(static_cast<Eigen::Index>(k), 0) = 1.0;
      a.row(static_cast<Eigen::Index>(k)).tail(x.cols()) = x.row(r);
      b(static_cast<Eigen::Index>(k)) = y(r);
    }
    const Eigen::VectorXd beta = a.colPivHouseholderQr().solve(b);
    for (auto r : test) pred(r) = beta(0) + x.row(r).dot(beta.tail(x.cols()));
  }
  const double sse = (y - pred).squaredNorm();
  return 1.0 - sse / sst;
}

inline double cv_centroid_accuracy(const Eigen::MatrixXd& x, const std::vector<std::string>& labels,
                                   std::uint64_t seed) {
  const std::size_t rows = labels.size();
  const auto fold = detail::fold_assignment(rows, seed);
  std::size_t correct = 0;
  for (std::size_t f = 0; f < kPredictabilityFolds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t r = 0; r < rows; ++r) (fold[r] == f ? test : train).push_back(r);
    if (test.empty() || train.empty()) continue;
    // standardise with training statistics
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(x.cols());
    Eigen::VectorXd sd = Eigen::VectorXd::Ones(x.cols());
    if (x.cols() > 0) {
      for (auto r : train) mu += x.row(static_cast<Eigen::Index>(r)).transpose();
      mu /= static_cast<double>(train.size());
      Eigen::VectorXd var = Eigen::VectorXd::Zero(x.cols());
      for (auto r : train) var += (x.row(static_cast<Eigen::Index>(r)).transpose() - mu).array().square().matrix();
      var /= static_cast<double>(train.size());
      for (Eigen::Index c = 0; c < x.cols(); ++c) sd(c) = var(c) > 0 ? std::sqrt(var(c)) : 1.0;
    }
    std::map<std::string, std::pair<Eigen::VectorXd, std::size_t>> centroids;
    for (auto r : train) {
      auto& [sum, count] = centroids.try_emplace(labels[r], Eigen::VectorXd::Zero(x.cols()), 0).first->second;
      sum += ((x.row(static_cast<Eigen::Index>(r)).transpose() - mu).array() / sd.array()).matrix();
      ++count;
    }
    // ties (including the no-feature case) go to the larger class, then the name
    for (auto r : test) {
      const Eigen::VectorXd z = ((x.row(static_cast<Eigen::Index>(r)).transpose() - mu).array() / sd.array()).matrix();
      const std::string* best = nullptr;
      double best_d = 0;
      std::size_t best_count = 0;
      for (const auto& [label, entry] : centroids) {
        const double d = (z - entry.first / static_cast<double>(entry.second)).squaredNorm();
        if (!best || d < best_d - 1e-12 || (std::abs(d - best_d) <= 1e-12 && entry.second > best_count)) {
          best = &label;
          best_d = d;
          best_count = entry.second;
        }
      }
      if (best && *best == labels[r]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(rows);
}

}  // namespace detail

inline PredictabilityScore feature_predictability(const ingest::CanonicalTable& table, std::string_view target,
                                                  std::uint64_t seed = 42) {
  const auto* target_col = table.find(target);
  require(target_col != nullptr, ErrorCode::kTargetMissing, "no column named " + std::string(target));
  require(table.columns.size() >= 2, ErrorCode::kPrecondition, "predictability needs at least two columns");
  require(table.row_count >= kPredictabilityMinRows, ErrorCode::kTooFewRows,
          "predictability needs at least " + std::to_string(kPredictabilityMinRows) + " rows");

  std::vector<std::vector<std::optional<double>>> features;
  for (const auto& c : table.columns) {
    if (c.name != target && ingest::is_numeric(c.kind)) features.push_back(c.numbers());
  }
  const bool numeric_target = ingest::is_numeric(target_col->kind);
  const auto target_numbers = target_col->numbers();

  std::vector<std::size_t> usable;
  for (std::size_t r = 0; r < table.row_count; ++r) {
    if (numeric_target ? !target_numbers[r].has_value() : !target_col->values[r].has_value()) continue;
    bool complete = true;
    for (const auto& f : features) complete = complete && f[r].has_value();
    if (complete) usable.push_back(r);
  }
  require(usable.size() >= kPredictabilityMinRows, ErrorCode::kTooFewRows,
          "only " + std::to_string(usable.size()) + " complete rows");

  Eigen::MatrixXd x(static_cast<Eigen::Index>(usable.size()), static_cast<Eigen::Index>(features.size()));
  for (std::size_t k = 0; k < usable.size(); ++k) {
    for (std::size_t f = 0; f < features.size(); ++f) {
      x(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(f)) = *features[f][usable[k]];
    }
  }

  PredictabilityScore out;
  out.target_feature = std::string(target);
  if (numeric_target) {
    out.method = PredictabilityMethod::kLinearR2;
    Eigen::VectorXd y(static_cast<Eigen::Index>(usable.size()));
    for (std::size_t k = 0; k < usable.size(); ++k) y(static_cast<Eigen::Index>(k)) = *target_numbers[usable[k]];
    out.score = std::clamp(detail::cv_r2(x, y, seed), 0.0, 1.0);
    return out;
  }

  out.method = PredictabilityMethod::kClassificationUplift;
  std::vector<std::string> labels;
  std::map<std::string, std::size_t> counts;
  for (auto r : usable) {
    labels.push_back(*target_col->values[r]);
    ++counts[labels.back()];
  }
  std::size_t majority = 0;
  for (const auto& [label, c] : counts) majority = std::max(majority, c);
  const double base = static_cast<double>(majority) / static_cast<double>(labels.size());
  if (base >= 1.0) {
    out.score = 0.0;
    return out;
  }
  const double acc = detail::cv_centroid_accuracy(x, labels, seed);
  out.score = std::clamp((acc - base) / (1.0 - base), 0.0, 1.0);
  return out;
}

}  // namespace datascout::analyze
