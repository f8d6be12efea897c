// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "datascout/core/error.hpp"
#include "datascout/core/fs.hpp"
#include "datascout/ingest/feature_kind.hpp"
#include "datascout/ingest/table.hpp"

namespace datascout::ingest {

namespace csv {

/// RFC-4180 record splitter. Quoted fields may contain separators, quotes
/// ("" escape) and line breaks. Returns one vector of fields per record and
/// the 1-based line on which each record starts.
struct Records {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;
};

inline Records split(std::string_view data, char sep = ',') {
  if (data.size() >= 3 && data.substr(0, 3) == "\xEF\xBB\xBF") data.remove_prefix(3);
  Records out;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  bool row_has_content = false;
  std::size_t line = 1;
  std::size_t row_line = 1;
  std::size_t quote_line = 0;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    if (row_has_content || !row.empty()) {
      end_field();
      out.rows.push_back(std::move(row));
      out.lines.push_back(row_line);
    }
    row.clear();
    row_has_content = false;
  };

  for (std::size_t i = 0; i < data.size(); ++i) {
    const char c = data[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < data.size() && data[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
      row_has_content = true;
      quote_line = line;
    } else if (c == sep) {
      end_field();
      row_has_content = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < data.size() && data[i + 1] == '\n') ++i;
      end_row();
      ++line;
      row_line = line;
    } else {
      field.push_back(c);
      field_started = true;
      row_has_content = true;
    }
  }
  if (in_quotes) {
    fail(ErrorCode::kParseError, "unterminated quoted field starting at line " + std::to_string(quote_line));
  }
  end_row();
  return out;
}

inline std::string quote(std::string_view field) {
  const bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos ||
                     (!field.empty() && (text::is_space_byte(static_cast<unsigned char>(field.front())) ||
                                         text::is_space_byte(static_cast<unsigned char>(field.back()))));
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace csv

struct TabularOptions {
  KindThresholds thresholds;
  /// Fraction of data rows allowed to have the wrong field count.
  double max_ragged_fraction = 0.01;
};

/// Types every column in place.
inline void assign_kinds(CanonicalTable& table, const KindThresholds& cfg = {}) {
  for (auto& c : table.columns) c.kind = detect_feature_kind(c.values, cfg);
}

inline CanonicalTable parse_csv(std::string_view data, const TabularOptions& opts = {}) {
  auto records = csv::split(data);
  CanonicalTable table;
  if (records.rows.empty()) return table;
  const auto names = unique_column_names(records.rows.front());
  for (const auto& n : names) table.columns.push_back(Column{n, FeatureKind::kCategorical, {}});
  const std::size_t width = names.size();
  const std::size_t data_rows = records.rows.size() - 1;
  std::size_t ragged = 0;
  std::size_t first_ragged_line = 0;
  for (std::size_t r = 1; r < records.rows.size(); ++r) {
    auto& row = records.rows[r];
    if (row.size() != width) {
      if (ragged++ == 0) first_ragged_line = records.lines[r];
    }
    for (std::size_t c = 0; c < width; ++c) {
      if (c < row.size() && !is_null_token(row[c])) {
        table.columns[c].values.emplace_back(std::move(row[c]));
      } else {
        table.columns[c].values.emplace_back(std::nullopt);
      }
    }
  }
  if (ragged > 0 && static_cast<double>(ragged) > opts.max_ragged_fraction * static_cast<double>(data_rows)) {
    fail(ErrorCode::kParseError, std::to_string(ragged) + " ragged rows, first at line " +
                                     std::to_string(first_ragged_line));
  }
  table.row_count = data_rows;
  assign_kinds(table, opts.thresholds);
  return table;
}

inline std::string to_csv(const CanonicalTable& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out.push_back(',');
    out += csv::quote(table.columns[c].name);
  }
  out += "\r\n";
  for (std::size_t r = 0; r < table.row_count; ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (c) out.push_back(',');
      const auto& cell = table.columns[c].values[r];
      if (cell) out += csv::quote(*cell);
    }
    out += "\r\n";
  }
  return out;
}

/// Flat XML: the root holds repeated row elements (the most frequent child
/// tag); each row's attributes and child elements become columns, in order
/// of first appearance.
inline CanonicalTable parse_xml(std::string_view data, const TabularOptions& opts = {}) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(data)};
  try {
    pt::read_xml(in, tree, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    fail(ErrorCode::kParseError, "xml line " + std::to_string(e.line()) + ": " + e.message());
  }
  const pt::ptree* root = nullptr;
  for (const auto& [tag, child] : tree) {
    if (tag != "<xmlcomment>" && tag != "<xmlattr>") {
      root = &child;
      break;
    }
  }
  require(root != nullptr, ErrorCode::kParseError, "xml without root element");

  std::map<std::string, std::size_t> tag_counts;
  std::vector<std::string> tag_order;
  for (const auto& [tag, child] : *root) {
    if (tag == "<xmlattr>" || tag == "<xmlcomment>") continue;
    if (tag_counts[tag]++ == 0) tag_order.push_back(tag);
  }
  CanonicalTable table;
  if (tag_order.empty()) return table;
  std::string row_tag = tag_order.front();
  for (const auto& t : tag_order) {
    if (tag_counts[t] > tag_counts[row_tag]) row_tag = t;
  }

  std::vector<std::string> field_order;
  std::map<std::string, std::size_t> field_index;
  std::vector<std::map<std::string, std::string>> rows;
  std::size_t element_no = 0;
  for (const auto& [tag, row] : *root) {
    if (tag != row_tag) continue;
    ++element_no;
    std::map<std::string, std::string> fields;
    auto add = [&](const std::string& name, const std::string& value) {
      if (!field_index.count(name)) {
        field_index[name] = field_order.size();
        field_order.push_back(name);
      }
      fields[name] = value;
    };
    for (const auto& [ftag, fnode] : row) {
      if (ftag == "<xmlattr>") {
        for (const auto& [aname, anode] : fnode) add(aname, anode.data());
      } else if (ftag != "<xmlcomment>") {
        if (!fnode.empty() && fnode.begin()->first != "<xmlattr>") {
          fail(ErrorCode::kParseError, "nested element <" + ftag + "> in <" + row_tag + "> #" +
                                           std::to_string(element_no));
        }
        add(ftag, fnode.data());
      }
    }
    rows.push_back(std::move(fields));
  }
  const auto names = unique_column_names(field_order);
  for (std::size_t f = 0; f < field_order.size(); ++f) {
    Column col{names[f], FeatureKind::kCategorical, {}};
    for (const auto& row : rows) {
      auto it = row.find(field_order[f]);
      if (it == row.end() || is_null_token(it->second)) {
        col.values.emplace_back(std::nullopt);
      } else {
        col.values.emplace_back(it->second);
      }
    }
    table.columns.push_back(std::move(col));
  }
  table.row_count = rows.size();
  assign_kinds(table, opts.thresholds);
  return table;
}

inline CanonicalTable load_tabular(const std::filesystem::path& path, const TabularOptions& opts = {}) {
  require(std::filesystem::exists(path), ErrorCode::kFileMissing, path.string());
  const auto ext = text::to_lower(path.extension().string());
  const auto data = fs::read_file(path);
  if (ext == ".xml") return parse_xml(data, opts);
  require(ext == ".csv", ErrorCode::kUnsupportedFormat, path.string() + " is not tabular");
  return parse_csv(data, opts);
}

}  // namespace datascout::ingest
