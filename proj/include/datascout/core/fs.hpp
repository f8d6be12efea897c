// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unistd.h>

#include "datascout/core/error.hpp"

namespace datascout::fs {

namespace stdfs = std::filesystem;

inline std::string read_file(const stdfs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kFileMissing, path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Unique sibling path for staging writes.
inline stdfs::path temp_sibling(const stdfs::path& target) {
  static std::atomic<unsigned long> counter{0};
  auto name = target.filename().string() + ".tmp." + std::to_string(::getpid()) + "." +
              std::to_string(counter.fetch_add(1));
  return target.parent_path() / name;
}

/// Write-temp-then-rename so readers never observe a partial file.
inline void write_file_atomic(const stdfs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) stdfs::create_directories(path.parent_path());
  const auto tmp = temp_sibling(path);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::kIoFailure, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      stdfs::remove(tmp, ec);
      fail(ErrorCode::kIoFailure, "short write to " + tmp.string());
    }
  }
  std::error_code ec;
  stdfs::rename(tmp, path, ec);
  if (ec) {
    stdfs::remove(tmp, ec);
    fail(ErrorCode::kIoFailure, "cannot rename into " + path.string());
  }
}

inline void append_line(const stdfs::path& path, std::string_view line) {
  if (path.has_parent_path()) stdfs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::app);
  require(static_cast<bool>(out), ErrorCode::kIoFailure, "cannot append to " + path.string());
  out << line << '\n';
}

}  // namespace datascout::fs
