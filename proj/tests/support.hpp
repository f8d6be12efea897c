// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "datascout/core/error.hpp"

/// Runs `expr` and checks that it raises datascout::Error with code `c`.
#define CHECK_ERROR_CODE(expr, c)                                 \
  do {                                                            \
    bool raised_ = false;                                         \
    try {                                                         \
      (void)(expr);                                               \
    } catch (const datascout::Error& e_) {                        \
      raised_ = true;                                             \
      CHECK(datascout::to_string(e_.code()) == datascout::to_string(c)); \
    }                                                             \
    CHECK(raised_);                                               \
  } while (0)

namespace testsupport {

inline std::filesystem::path fixtures() { return DATASCOUT_FIXTURES; }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    std::random_device rd;
    const auto base = std::filesystem::temp_directory_path();
    for (;;) {
      path_ = base / ("datascout-" + tag + "-" + std::to_string(rd()));
      if (std::filesystem::create_directory(path_)) break;
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

}  // namespace testsupport
