// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "datascout/core/error.hpp"
#include "datascout/core/http.hpp"
#include "datascout/ingest/tabular.hpp"

namespace datascout::ingest {

/// Parameters understood by the dataset loaders:
///   split    - "train", "test[:10]", "train[10:20]" or "train[:50%]"
///   revision - hub revision (defaults to "main")
using DatasetParams = std::map<std::string, std::string>;

struct DatasetProvenance {
  std::string hub;
  std::string name;
  std::string revision;
  std::string split;
  std::vector<std::string> files;
};

struct LoadedDataset {
  CanonicalTable table;
  DatasetProvenance provenance;
};

struct SplitSpec {
  std::string name = "train";
  std::optional<double> begin;
  std::optional<double> end;
  bool percent = false;
};

inline SplitSpec parse_split(std::string_view s) {
  SplitSpec out;
  s = text::trim(s);
  if (s.empty()) return out;
  const auto bracket = s.find('[');
  out.name = std::string(text::trim(s.substr(0, bracket)));
  if (bracket == std::string_view::npos) return out;
  require(s.back() == ']', ErrorCode::kInvalidArgument, "bad split " + std::string(s));
  auto inner = s.substr(bracket + 1, s.size() - bracket - 2);
  const auto colon = inner.find(':');
  require(colon != std::string_view::npos, ErrorCode::kInvalidArgument, "split slice needs ':'");
  auto bound = [&](std::string_view b) -> std::optional<double> {
    b = text::trim(b);
    if (b.empty()) return std::nullopt;
    if (b.back() == '%') {
      out.percent = true;
      b.remove_suffix(1);
    }
    double v = 0;
    require(text::parse_double(b, v), ErrorCode::kInvalidArgument, "bad split bound " + std::string(b));
    return v;
  };
  out.begin = bound(inner.substr(0, colon));
  out.end = bound(inner.substr(colon + 1));
  return out;
}

inline CanonicalTable apply_split(const CanonicalTable& table, const SplitSpec& split) {
  const double n = static_cast<double>(table.row_count);
  auto resolve = [&](std::optional<double> b, double fallback) {
    if (!b) return fallback;
    double v = split.percent ? *b * n / 100.0 : *b;
    if (v < 0) v += n;
    return std::clamp(v, 0.0, n);
  };
  const auto begin = static_cast<std::size_t>(resolve(split.begin, 0));
  const auto end = static_cast<std::size_t>(resolve(split.end, n));
  return table.slice(begin, end > begin ? end - begin : 0);
}

namespace detail {

inline bool loadable(const std::string& file) {
  const auto ext = text::to_lower(std::filesystem::path(file).extension().string());
  return ext == ".csv" || ext == ".xml";
}

/// Files belonging to the split: those mentioning its name, else every
/// loadable file. Parquet-only listings are rejected.
inline std::vector<std::string> select_files(const std::vector<std::string>& all, const std::string& split,
                                             const std::string& name) {
  std::vector<std::string> tabular;
  for (const auto& f : all) {
    if (loadable(f)) tabular.push_back(f);
  }
  require(!tabular.empty(), ErrorCode::kUnsupportedPayload, "dataset " + name + " has no CSV or XML files");
  std::vector<std::string> matching;
  for (const auto& f : tabular) {
    if (text::to_lower(f).find(text::to_lower(split)) != std::string::npos) matching.push_back(f);
  }
  auto& chosen = matching.empty() ? tabular : matching;
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

inline CanonicalTable concat(std::vector<CanonicalTable> parts) {
  if (parts.empty()) return {};
  CanonicalTable out = std::move(parts.front());
  for (std::size_t p = 1; p < parts.size(); ++p) {
    auto& part = parts[p];
    require(part.column_names() == out.column_names(), ErrorCode::kUnsupportedPayload,
            "dataset files have different columns");
    for (std::size_t c = 0; c < out.columns.size(); ++c) {
      auto& dst = out.columns[c].values;
      auto& src = part.columns[c].values;
      dst.insert(dst.end(), std::make_move_iterator(src.begin()), std::make_move_iterator(src.end()));
    }
    out.row_count += part.row_count;
  }
  assign_kinds(out);
  return out;
}

inline CanonicalTable parse_by_name(const std::string& file, const std::string& data) {
  const auto ext = text::to_lower(std::filesystem::path(file).extension().string());
  return ext == ".xml" ? parse_xml(data) : parse_csv(data);
}

}  // namespace detail

class DatasetSource {
 public:
  virtual ~DatasetSource() = default;
  virtual LoadedDataset load(const std::string& name, const DatasetParams& params) const = 0;
};

/// Hub client: GET {hub}/api/datasets/{name}[/revision/{rev}] for the file
/// listing ({"sha": ..., "siblings": [{"rfilename": ...}]}), then each file
/// from {hub}/datasets/{name}/resolve/{revision}/{file}.
class DatasetHubClient final : public DatasetSource {
 public:
  DatasetHubClient(std::string base_url, std::shared_ptr<http::Transport> transport, std::string token = {},
                   http::RetryPolicy retry = {})
      : base_(std::move(base_url)), transport_(std::move(transport)), token_(std::move(token)), retry_(retry) {
    while (!base_.empty() && base_.back() == '/') base_.pop_back();
  }

  LoadedDataset load(const std::string& name, const DatasetParams& params) const override {
    const auto split = parse_split(param(params, "split"));
    std::string revision = param(params, "revision");
    std::string info_url = base_ + "/api/datasets/" + name;
    if (!revision.empty()) info_url += "/revision/" + http::url_encode(revision);
    const auto info_res = fetch(info_url);
    if (info_res.status == 404) fail(ErrorCode::kDatasetNotFound, name);
    http::raise_for_status(info_res, "dataset listing " + name);
    nlohmann::json info;
    try {
      info = nlohmann::json::parse(info_res.body);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kMalformedResponse, "dataset listing " + name + ": " + e.what());
    }
    if (revision.empty()) revision = info.value("sha", std::string("main"));
    std::vector<std::string> files;
    for (const auto& s : info.value("siblings", nlohmann::json::array())) {
      files.push_back(s.at("rfilename").get<std::string>());
    }
    const auto chosen = detail::select_files(files, split.name, name);
    std::vector<CanonicalTable> parts;
    for (const auto& f : chosen) {
      const auto res = fetch(base_ + "/datasets/" + name + "/resolve/" + http::url_encode(revision) + "/" + f);
      http::raise_for_status(res, "dataset file " + f);
      parts.push_back(detail::parse_by_name(f, res.body));
    }
    LoadedDataset out;
    out.table = apply_split(detail::concat(std::move(parts)), split);
    out.provenance = DatasetProvenance{base_, name, revision, param(params, "split"), chosen};
    return out;
  }

 private:
  static std::string param(const DatasetParams& p, const std::string& key) {
    auto it = p.find(key);
    return it == p.end() ? std::string{} : it->second;
  }

  http::Response fetch(const std::string& url) const {
    http::Headers headers;
    if (!token_.empty()) headers.emplace_back("Authorization", "Bearer " + token_);
    return http::with_retry(retry_, [&] {
      auto res = transport_->get(url, headers);
      if (res.status >= 500) fail(ErrorCode::kTransportFailure, url + " returned " + std::to_string(res.status));
      return res;
    });
  }

  std::string base_;
  std::shared_ptr<http::Transport> transport_;
  std::string token_;
  http::RetryPolicy retry_;
};

/// Datasets stored as {root}/{name}/ directories holding CSV/XML files.
class LocalDatasetDirectory final : public DatasetSource {
 public:
  explicit LocalDatasetDirectory(std::filesystem::path root) : root_(std::move(root)) {}

  LoadedDataset load(const std::string& name, const DatasetParams& params) const override {
    const auto dir = root_ / name;
    require(!name.empty() && std::filesystem::is_directory(dir), ErrorCode::kDatasetNotFound, name);
    std::vector<std::string> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
      if (e.is_regular_file()) files.push_back(std::filesystem::relative(e.path(), dir).generic_string());
    }
    auto split_it = params.find("split");
    const auto split = parse_split(split_it == params.end() ? "" : split_it->second);
    const auto chosen = detail::select_files(files, split.name, name);
    std::vector<CanonicalTable> parts;
    for (const auto& f : chosen) parts.push_back(detail::parse_by_name(f, fs::read_file(dir / f)));
    LoadedDataset out;
    out.table = apply_split(detail::concat(std::move(parts)), split);
    out.provenance = DatasetProvenance{"local:" + root_.generic_string(), name, "local",
                                       split_it == params.end() ? "" : split_it->second, chosen};
    return out;
  }

 private:
  std::filesystem::path root_;
};

inline LoadedDataset load_dataset_by_name(const std::string& name, const DatasetParams& params,
                                          const DatasetSource& source) {
  return source.load(name, params);
}

}  // namespace datascout::ingest
