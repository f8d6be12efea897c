// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <chrono>
#include <ctime>
#include <functional>
#include <string>

namespace datascout {

/// Source of ISO-8601 UTC timestamps. Injected so runs can be replayed.
using Clock = std::function<std::string()>;

inline std::string utc_now_iso() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline Clock system_clock() { return utc_now_iso; }

inline Clock fixed_clock(std::string stamp) {
  return [stamp = std::move(stamp)] { return stamp; };
}

}  // namespace datascout
