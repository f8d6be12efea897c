// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "datascout/core/error.hpp"
#include "datascout/core/hash.hpp"
#include "datascout/core/text.hpp"

namespace datascout::ingest {

enum class FileFormat {
  kTabularCsv,
  kTabularXml,
  kTextPlain,
  kDocumentPdf,
  kImageJpg,
  kImagePng,
  kImageTiff,
  kUnsupported,
};

inline std::string_view to_string(FileFormat f) {
  switch (f) {
    case FileFormat::kTabularCsv: return "tabular-csv";
    case FileFormat::kTabularXml: return "tabular-xml";
    case FileFormat::kTextPlain: return "text-plain";
    case FileFormat::kDocumentPdf: return "document-pdf";
    case FileFormat::kImageJpg: return "image-jpg";
    case FileFormat::kImagePng: return "image-png";
    case FileFormat::kImageTiff: return "image-tiff";
    case FileFormat::kUnsupported: return "unsupported";
  }
  return "unsupported";
}

inline FileFormat file_format_from_string(std::string_view s) {
  for (auto f : {FileFormat::kTabularCsv, FileFormat::kTabularXml, FileFormat::kTextPlain, FileFormat::kDocumentPdf,
                 FileFormat::kImageJpg, FileFormat::kImagePng, FileFormat::kImageTiff}) {
    if (to_string(f) == s) return f;
  }
  return FileFormat::kUnsupported;
}

inline bool is_tabular(FileFormat f) { return f == FileFormat::kTabularCsv || f == FileFormat::kTabularXml; }

inline bool is_image(FileFormat f) {
  return f == FileFormat::kImageJpg || f == FileFormat::kImagePng || f == FileFormat::kImageTiff;
}

inline bool is_textual(FileFormat f) { return f == FileFormat::kTextPlain || f == FileFormat::kDocumentPdf; }

/// Extension-based, case-insensitive.
inline FileFormat format_from_extension(const std::filesystem::path& path) {
  const auto ext = text::to_lower(path.extension().string());
  if (ext == ".csv") return FileFormat::kTabularCsv;
  if (ext == ".xml") return FileFormat::kTabularXml;
  if (ext == ".txt") return FileFormat::kTextPlain;
  if (ext == ".pdf") return FileFormat::kDocumentPdf;
  if (ext == ".jpg" || ext == ".jpeg") return FileFormat::kImageJpg;
  if (ext == ".png") return FileFormat::kImagePng;
  if (ext == ".tif" || ext == ".tiff") return FileFormat::kImageTiff;
  return FileFormat::kUnsupported;
}

inline FileFormat detect_format(const std::filesystem::path& path) {
  require(std::filesystem::exists(path), ErrorCode::kFileMissing, path.string());
  return format_from_extension(path);
}

/// Stable identifier for a file within a record.
inline std::string make_file_id(std::string_view record_id, std::string_view name) {
  std::string key(record_id);
  key.push_back('\x1f');
  key += name;
  return hashing::sha256_hex(key).substr(0, 16);
}

struct FileEntry {
  std::string file_id;
  std::string record_id;
  std::string name;
  std::filesystem::path path;
  FileFormat format = FileFormat::kUnsupported;
  std::uint64_t size_bytes = 0;

  static FileEntry from_path(std::string record_id, const std::filesystem::path& path) {
    FileEntry e;
    e.record_id = std::move(record_id);
    e.name = path.filename().string();
    e.file_id = make_file_id(e.record_id, e.name);
    e.path = path;
    e.format = detect_format(path);
    e.size_bytes = std::filesystem::file_size(path);
    return e;
  }
};

inline void to_json(nlohmann::json& j, const FileEntry& e) {
  j = nlohmann::json{{"file_id", e.file_id},       {"record_id", e.record_id},
                     {"name", e.name},             {"path", e.path.generic_string()},
                     {"format", to_string(e.format)}, {"size_bytes", e.size_bytes}};
}

inline void from_json(const nlohmann::json& j, FileEntry& e) {
  e.file_id = j.at("file_id").get<std::string>();
  e.record_id = j.at("record_id").get<std::string>();
  e.name = j.at("name").get<std::string>();
  e.path = j.at("path").get<std::string>();
  e.format = file_format_from_string(j.at("format").get<std::string>());
  e.size_bytes = j.value("size_bytes", std::uint64_t{0});
}

}  // namespace datascout::ingest
