// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <httplib.h>
// resolv.h defines _res as a macro, which breaks Eigen parameter names
#ifdef _res
#undef _res
#endif
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "datascout/core/error.hpp"
#include "datascout/core/fs.hpp"
#include "datascout/core/text.hpp"

namespace datascout::http {

using Headers = std::vector<std::pair<std::string, std::string>>;

struct Request {
  std::string method = "GET";
  std::string url;
  Headers headers;
  std::string body;
  std::string content_type;
};

struct Response {
  int status = 0;
  std::string body;
  std::string content_type;

  bool ok() const { return status >= 200 && status < 300; }
};

struct Url {
  std::string scheme;  // "http" or "https"
  std::string host;
  int port = 0;
  std::string target;  // path plus optional query, always starts with '/'

  std::string origin() const { return scheme + "://" + host + ":" + std::to_string(port); }

  std::string path() const { return target.substr(0, target.find('?')); }
};

inline Url parse_url(std::string_view url) {
  Url out;
  auto sep = url.find("://");
  require(sep != std::string_view::npos, ErrorCode::kInvalidArgument, "url without scheme: " + std::string(url));
  out.scheme = text::to_lower(url.substr(0, sep));
  require(out.scheme == "http" || out.scheme == "https", ErrorCode::kInvalidArgument,
          "unsupported scheme in " + std::string(url));
  auto rest = url.substr(sep + 3);
  auto slash = rest.find_first_of("/?");
  auto authority = rest.substr(0, slash);
  out.target = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
  if (!out.target.empty() && out.target.front() == '?') out.target.insert(0, "/");
  auto colon = authority.rfind(':');
  if (colon != std::string_view::npos && authority.find(']') == std::string_view::npos) {
    out.host = std::string(authority.substr(0, colon));
    long long port = 0;
    require(text::parse_integer(authority.substr(colon + 1), port) && port > 0 && port < 65536,
            ErrorCode::kInvalidArgument, "bad port in " + std::string(url));
    out.port = static_cast<int>(port);
  } else {
    out.host = std::string(authority);
    out.port = out.scheme == "https" ? 443 : 80;
  }
  require(!out.host.empty(), ErrorCode::kInvalidArgument, "url without host: " + std::string(url));
  return out;
}

/// Percent-encodes everything outside the RFC 3986 unreserved set.
inline std::string url_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xf]);
    }
  }
  return out;
}

/// Abstract request sender. Implementations throw kTransportFailure when no
/// HTTP response was obtained at all; HTTP error statuses are returned.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual Response send(const Request& request) = 0;

  Response get(const std::string& url, Headers headers = {}) {
    return send(Request{"GET", url, std::move(headers), {}, {}});
  }
};

class NetworkTransport final : public Transport {
 public:
  explicit NetworkTransport(std::chrono::seconds timeout = std::chrono::seconds(30))
      : timeout_(timeout) {}

  Response send(const Request& request) override {
    const Url url = parse_url(request.url);
    httplib::Client client(url.origin());
    client.set_follow_location(true);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);
    httplib::Headers headers;
    for (const auto& [k, v] : request.headers) headers.emplace(k, v);
    httplib::Result res;
    if (request.method == "GET") {
      res = client.Get(url.target, headers);
    } else if (request.method == "POST") {
      res = client.Post(url.target, headers, request.body,
                        request.content_type.empty() ? "application/json" : request.content_type);
    } else {
      fail(ErrorCode::kInvalidArgument, "unsupported method " + request.method);
    }
    if (!res) {
      fail(ErrorCode::kTransportFailure,
           request.method + " " + request.url + ": " + httplib::to_string(res.error()));
    }
    return Response{res->status, res->body, res->get_header_value("Content-Type")};
  }

 private:
  std::chrono::seconds timeout_;
};

/// Serves canned responses from a directory.
///
/// `routes.json` maps "METHOD /path?query" keys to {"file": ..., "status": ...,
/// "content_type": ...}. Without a route, GET falls back to the file at the
/// URL path relative to the root (query ignored), else 404. The host part of
/// the URL is ignored.
class FixtureTransport final : public Transport {
 public:
  explicit FixtureTransport(std::filesystem::path root) : root_(std::move(root)) {
    const auto routes_file = root_ / "routes.json";
    if (std::filesystem::exists(routes_file)) {
      routes_ = nlohmann::json::parse(fs::read_file(routes_file));
    }
  }

  Response send(const Request& request) override {
    const Url url = parse_url(request.url);
    {
      std::lock_guard lock(mu_);
      log_.push_back(request.method + " " + url.target);
    }
    const std::string key = request.method + " " + url.target;
    if (routes_.contains(key)) {
      const auto& route = routes_[key];
      Response res;
      res.status = route.value("status", 200);
      res.content_type = route.value("content_type", std::string("application/json"));
      if (route.contains("file")) {
        res.body = fs::read_file(root_ / route["file"].get<std::string>());
      } else if (route.contains("body")) {
        res.body = route["body"].is_string() ? route["body"].get<std::string>() : route["body"].dump();
      }
      if (route.value("transport_error", false)) {
        fail(ErrorCode::kTransportFailure, "fixture transport error for " + key);
      }
      return res;
    }
    if (request.method == "GET") {
      auto rel = url.path();
      while (!rel.empty() && rel.front() == '/') rel.erase(0, 1);
      const auto file = root_ / rel;
      if (!rel.empty() && std::filesystem::is_regular_file(file)) {
        return Response{200, fs::read_file(file), "application/octet-stream"};
      }
    }
    return Response{404, R"({"status":404,"message":"not found"})", "application/json"};
  }

  /// Requests seen so far, as "METHOD /target".
  std::vector<std::string> requests() const {
    std::lock_guard lock(mu_);
    return log_;
  }

 private:
  std::filesystem::path root_;
  nlohmann::json routes_ = nlohmann::json::object();
  mutable std::mutex mu_;
  std::vector<std::string> log_;
};

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
};

/// Runs `fn` until it succeeds or a non-retryable error is raised, doubling
/// the wait between attempts.
template <typename Fn>
auto with_retry(const RetryPolicy& policy, Fn&& fn) -> decltype(fn()) {
  const int attempts = std::max(1, policy.attempts);
  auto backoff = policy.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    try {
      return fn();
    } catch (const Error& e) {
      if (!e.retryable() || attempt >= attempts) throw;
    }
    std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

/// Maps an HTTP status to the error taxonomy; 5xx is retryable.
inline void raise_for_status(const Response& res, const std::string& what) {
  if (res.ok()) return;
  if (res.status == 401 || res.status == 403) {
    fail(ErrorCode::kAuthFailure, what + " rejected with HTTP " + std::to_string(res.status));
  }
  if (res.status >= 500 || res.status == 429) {
    fail(ErrorCode::kTransportFailure, what + " returned HTTP " + std::to_string(res.status));
  }
  fail(ErrorCode::kMalformedResponse, what + " returned HTTP " + std::to_string(res.status));
}

}  // namespace datascout::http
