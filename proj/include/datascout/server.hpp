// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <string>

#include "datascout/core/error.hpp"
#include "datascout/core/http.hpp"
#include "datascout/core/text.hpp"
#include "datascout/modelgw.hpp"
#include "datascout/service.hpp"

namespace datascout::server {

inline constexpr int kDefaultPort = 8080;

/// DATASCOUT_PORT when set to a valid port, else 8080.
inline int port_from_env() {
  if (const char* env = std::getenv("DATASCOUT_PORT")) {
    long long v = 0;
    if (text::parse_integer(env, v) && v > 0 && v < 65536) return static_cast<int>(v);
  }
  return kDefaultPort;
}

struct ServerConfig {
  std::string host = "0.0.0.0";
  int port = kDefaultPort;
  std::string cors_origin = "*";
};

/// JSON API over a catalog that can be swapped in after start-up. Until a
/// catalog is installed every data endpoint answers 503.
class Server {
 public:
  Server(ServerConfig config, modelgw::Gateway gateway) : config_(std::move(config)), gateway_(std::move(gateway)) {
    // SO_REUSEADDR only, so a port held by another server fails to bind
    http_.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
    });
    routes();
  }

  void install(service::Catalog catalog) {
    std::atomic_store(&catalog_, std::make_shared<const service::Catalog>(std::move(catalog)));
  }

  bool ready() const { return std::atomic_load(&catalog_) != nullptr; }

  /// Binds and serves until stop(); kPortInUse when the port cannot be bound.
  void listen() {
    if (!http_.bind_to_port(config_.host, config_.port)) {
      fail(ErrorCode::kPortInUse, "cannot bind " + config_.host + ":" + std::to_string(config_.port));
    }
    bound_port_ = config_.port;
    http_.listen_after_bind();
  }

  /// Binds an ephemeral port and returns it; call serve() afterwards.
  int bind_any() {
    const int port = http_.bind_to_any_port(config_.host);
    require(port > 0, ErrorCode::kPortInUse, "cannot bind any port on " + config_.host);
    bound_port_ = port;
    return port;
  }

  void serve() { http_.listen_after_bind(); }
  void stop() { http_.stop(); }
  void wait_until_ready() { http_.wait_until_ready(); }
  int port() const { return bound_port_; }

 private:
  using Catalog = std::shared_ptr<const service::Catalog>;

  void send_json(httplib::Response& res, int status, const nlohmann::json& body) const {
    res.status = status;
    res.set_content(body.dump(), "application/json; charset=utf-8");
  }

  /// Runs `fn` with the loaded catalog, mapping errors onto JSON responses.
  template <typename Fn>
  void with_catalog(httplib::Response& res, Fn&& fn) const {
    const Catalog catalog = std::atomic_load(&catalog_);
    if (!catalog) {
      send_json(res, 503, service::error_body(to_string(ErrorCode::kMissingIndex), "index not loaded"));
      return;
    }
    try {
      fn(*catalog);
    } catch (const Error& e) {
      const int status = e.code() == ErrorCode::kInvalidArgument || e.code() == ErrorCode::kInvalidInput ? 400 : 500;
      send_json(res, status, service::error_body(to_string(e.code()), e.what()));
    } catch (const std::exception& e) {
      send_json(res, 500, service::error_body("internal", e.what()));
    }
  }

  void routes() {
    http_.set_default_headers({{"Access-Control-Allow-Origin", config_.cors_origin},
                               {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                               {"Access-Control-Allow-Headers", "Content-Type"}});
    http_.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    http_.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
      const Catalog catalog = std::atomic_load(&catalog_);
      if (!catalog) {
        send_json(res, 503, {{"status", "unavailable"}, {"error", to_string(ErrorCode::kMissingIndex)},
                             {"message", "index not loaded"}});
        return;
      }
      send_json(res, 200, {{"status", "ok"}, {"entries", catalog->index.size()}, {"records", catalog->record_ids().size()}});
    });

    http_.Get("/records", [this](const httplib::Request&, httplib::Response& res) {
      with_catalog(res, [&](const service::Catalog& c) { send_json(res, 200, service::records_response(c)); });
    });

    http_.Get(R"(/records/([^/]+)/report)", [this](const httplib::Request& req, httplib::Response& res) {
      with_catalog(res, [&](const service::Catalog& c) {
        const std::string id = req.matches[1];
        if (auto body = service::report_response(c, id)) {
          send_json(res, 200, *body);
        } else {
          send_json(res, 404, service::error_body("not-found", "no report for record " + id));
        }
      });
    });

    http_.Post("/query", [this](const httplib::Request& req, httplib::Response& res) {
      with_catalog(res, [&](const service::Catalog& c) {
        const auto body = nlohmann::json::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.is_object() || !body.contains("q") || !body["q"].is_string()) {
          send_json(res, 400, service::error_body(to_string(ErrorCode::kInvalidInput), "body must be {\"q\": string, \"k\": int}"));
          return;
        }
        long long k = static_cast<long long>(service::kDefaultK);
        if (body.contains("k")) {
          if (!body["k"].is_number_integer() || body["k"].get<long long>() < 1) {
            send_json(res, 400, service::error_body(to_string(ErrorCode::kInvalidInput), "k must be a positive integer"));
            return;
          }
          k = body["k"].get<long long>();
        }
        send_json(res, 200, service::query_response(c, gateway_, body["q"].get<std::string>(), static_cast<std::size_t>(k)));
      });
    });

    http_.Get("/graph", [this](const httplib::Request& req, httplib::Response& res) {
      with_catalog(res, [&](const service::Catalog& c) {
        const auto q = req.get_param_value("q");
        if (text::trim(q).empty()) {
          send_json(res, 400, service::error_body(to_string(ErrorCode::kInvalidInput), "missing q parameter"));
          return;
        }
        send_json(res, 200, service::graph_response(c, gateway_, q));
      });
    });
  }

  ServerConfig config_;
  modelgw::Gateway gateway_;
  httplib::Server http_;
  Catalog catalog_;
  int bound_port_ = 0;
};

}  // namespace datascout::server
