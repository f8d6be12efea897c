// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "datascout/core/error.hpp"
#include "datascout/core/fs.hpp"
#include "datascout/core/hash.hpp"
#include "datascout/core/http.hpp"
#include "datascout/core/text.hpp"
#include "datascout/ingest/file_entry.hpp"

namespace datascout::harvester {

inline constexpr std::size_t kDefaultPageSize = 25;
inline constexpr const char* kManifestFile = "community_manifest.json";
inline constexpr const char* kGovernanceLedger = "governance.jsonl";

struct FileRef {
  std::string name;
  std::uint64_t size_bytes = 0;
  std::string url;
  std::string checksum;  // "algo:hex" or empty

  bool operator==(const FileRef&) const = default;
};

struct RecordMeta {
  std::string record_id;
  std::string title;
  std::string user_description;
  std::optional<std::string> doi;
  std::optional<std::string> license_id;
  std::string created_at;
  std::vector<FileRef> files;
  std::string community_id;

  bool operator==(const RecordMeta&) const = default;
};

inline nlohmann::ordered_json to_json(const FileRef& f) {
  return {{"name", f.name}, {"size_bytes", f.size_bytes}, {"url", f.url}, {"checksum", f.checksum}};
}

inline nlohmann::ordered_json to_json(const RecordMeta& r) {
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const auto& f : r.files) files.push_back(to_json(f));
  nlohmann::ordered_json j{{"record_id", r.record_id}, {"title", r.title}, {"user_description", r.user_description}};
  j["doi"] = r.doi ? nlohmann::ordered_json(*r.doi) : nlohmann::ordered_json(nullptr);
  j["license_id"] = r.license_id ? nlohmann::ordered_json(*r.license_id) : nlohmann::ordered_json(nullptr);
  j["created_at"] = r.created_at;
  j["community_id"] = r.community_id;
  j["files"] = files;
  return j;
}

inline RecordMeta record_from_json(const nlohmann::json& j) {
  RecordMeta r;
  r.record_id = j.at("record_id").get<std::string>();
  r.title = j.value("title", std::string{});
  r.user_description = j.value("user_description", std::string{});
  if (j.contains("doi") && j["doi"].is_string()) r.doi = j["doi"].get<std::string>();
  if (j.contains("license_id") && j["license_id"].is_string()) r.license_id = j["license_id"].get<std::string>();
  r.created_at = j.value("created_at", std::string{});
  r.community_id = j.value("community_id", std::string{});
  for (const auto& f : j.value("files", nlohmann::json::array())) {
    r.files.push_back(FileRef{f.at("name").get<std::string>(), f.value("size_bytes", std::uint64_t{0}),
                              f.at("url").get<std::string>(), f.value("checksum", std::string{})});
  }
  return r;
}

inline std::vector<RecordMeta> load_manifest(const std::filesystem::path& path) {
  const auto j = nlohmann::json::parse(fs::read_file(path), nullptr, false);
  require(!j.is_discarded() && j.contains("records"), ErrorCode::kParseError, "bad manifest " + path.string());
  std::vector<RecordMeta> out;
  for (const auto& r : j["records"]) out.push_back(record_from_json(r));
  return out;
}

struct GovernanceDecision {
  std::string record_id;
  bool allowed = false;
  std::string reason;
};

enum class PublicationSource { kOpenAccessLookup, kHtmlMeta, kNone };

inline std::string_view to_string(PublicationSource s) {
  switch (s) {
    case PublicationSource::kOpenAccessLookup: return "open-access-lookup";
    case PublicationSource::kHtmlMeta: return "html-meta";
    case PublicationSource::kNone: return "none";
  }
  return "none";
}

struct PublicationRef {
  std::string record_id;
  PublicationSource source = PublicationSource::kNone;
  std::optional<std::string> url;
  std::optional<std::filesystem::path> local_path;
};

/// Permissive open licenses accepted by default.
inline std::set<std::string> default_allow_list() {
  return {"cc-by-4.0", "cc-by-3.0", "cc0-1.0", "mit", "apache-2.0", "bsd-2-clause", "bsd-3-clause",
          "odc-by-1.0", "pddl-1.0"};
}

/// JSON array of identifiers, or one identifier per line ('#' starts a comment).
inline std::set<std::string> load_allow_list(const std::filesystem::path& path) {
  const auto body = fs::read_file(path);
  std::set<std::string> out;
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (!j.is_discarded() && j.is_array()) {
    for (const auto& v : j) out.insert(text::to_lower(v.get<std::string>()));
    return out;
  }
  for (const auto& line : text::split_lines(body)) {
    auto t = text::trim(line.substr(0, line.find('#')));
    if (!t.empty()) out.insert(text::to_lower(t));
  }
  return out;
}

struct HarvesterConfig {
  std::string base_url = "https://zenodo.org/api";
  std::string token;
  std::set<std::string> allow_list = default_allow_list();
  http::RetryPolicy retry;
  std::string oa_base_url = "https://api.unpaywall.org";
  std::string doi_resolver = "https://doi.org";
  std::string contact_email = "datascout@example.org";
  /// Holds the manifest and the governance ledger.
  std::filesystem::path state_dir = ".";

  /// Token from DATASCOUT_REPO_TOKEN when not set explicitly.
  static HarvesterConfig from_json(const nlohmann::json& j) {
    HarvesterConfig c;
    c.base_url = j.value("base_url", c.base_url);
    c.token = j.value("token", std::string{});
    if (c.token.empty()) {
      if (const char* env = std::getenv("DATASCOUT_REPO_TOKEN")) c.token = env;
    }
    if (j.contains("allow_list")) {
      c.allow_list.clear();
      for (const auto& v : j["allow_list"]) c.allow_list.insert(text::to_lower(v.get<std::string>()));
    }
    c.retry.attempts = j.value("retry_attempts", c.retry.attempts);
    c.retry.initial_backoff =
        std::chrono::milliseconds(j.value("initial_backoff_ms", static_cast<long>(c.retry.initial_backoff.count())));
    c.oa_base_url = j.value("oa_base_url", c.oa_base_url);
    c.doi_resolver = j.value("doi_resolver", c.doi_resolver);
    c.contact_email = j.value("contact_email", c.contact_email);
    c.state_dir = j.value("state_dir", c.state_dir.string());
    return c;
  }
};

namespace detail {

inline std::string id_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  return {};
}

inline const nlohmann::json* child(const nlohmann::json& j, std::initializer_list<const char*> path) {
  const nlohmann::json* cur = &j;
  for (const char* k : path) {
    if (!cur->is_object() || !cur->contains(k)) return nullptr;
    cur = &(*cur)[k];
  }
  return cur;
}

inline std::string string_at(const nlohmann::json& j, std::initializer_list<const char*> path) {
  const auto* v = child(j, path);
  return v != nullptr && v->is_string() ? v->get<std::string>() : std::string{};
}

/// One repository hit. Throws std::string naming the offending field.
inline RecordMeta parse_hit(const nlohmann::json& hit, const std::string& community_id) {
  if (!hit.is_object()) throw std::string("hit is not an object");
  RecordMeta r;
  r.record_id = hit.contains("id") ? id_string(hit["id"]) : std::string{};
  if (r.record_id.empty()) throw std::string("hit without id");
  r.title = string_at(hit, {"title"});
  if (r.title.empty()) r.title = string_at(hit, {"metadata", "title"});
  r.user_description = string_at(hit, {"metadata", "description"});
  auto doi = string_at(hit, {"doi"});
  if (doi.empty()) doi = string_at(hit, {"metadata", "doi"});
  if (!doi.empty()) r.doi = doi;
  auto license = string_at(hit, {"metadata", "license", "id"});
  if (license.empty()) license = string_at(hit, {"metadata", "license"});
  if (!license.empty()) r.license_id = license;
  r.created_at = string_at(hit, {"created"});
  if (r.created_at.empty()) r.created_at = string_at(hit, {"created_at"});
  r.community_id = community_id;
  if (const auto* files = child(hit, {"files"})) {
    if (!files->is_array()) throw std::string("files of record " + r.record_id + " is not an array");
    for (const auto& f : *files) {
      FileRef ref;
      ref.name = string_at(f, {"key"});
      ref.url = string_at(f, {"links", "self"});
      ref.checksum = string_at(f, {"checksum"});
      if (const auto* size = child(f, {"size"}); size != nullptr && size->is_number_unsigned()) {
        ref.size_bytes = size->get<std::uint64_t>();
      }
      if (ref.name.empty() || ref.url.empty()) {
        throw std::string("file without key or links.self in record " + r.record_id);
      }
      r.files.push_back(std::move(ref));
    }
  }
  return r;
}

/// A file name that stays inside its record directory.
inline bool safe_file_name(std::string_view name) {
  return !name.empty() && name != "." && name != ".." && name.find('/') == std::string_view::npos &&
         name.find('\\') == std::string_view::npos && name.find('\0') == std::string_view::npos;
}

struct MetaTag {
  std::string name;
  std::string content;
};

inline std::string html_unescape(std::string s) {
  text::replace_all(s, "&amp;", "&");
  text::replace_all(s, "&quot;", "\"");
  text::replace_all(s, "&#39;", "'");
  text::replace_all(s, "&lt;", "<");
  text::replace_all(s, "&gt;", ">");
  return s;
}

inline std::vector<MetaTag> meta_tags(const std::string& html) {
  static const std::regex tag_re(R"(<meta\b[^>]*>)", std::regex::icase);
  static const std::regex attr_re(R"re(([a-zA-Z_:-]+)\s*=\s*(?:"([^"]*)"|'([^']*)'|([^\s"'>/]+)))re");
  std::vector<MetaTag> out;
  for (auto it = std::sregex_iterator(html.begin(), html.end(), tag_re); it != std::sregex_iterator(); ++it) {
    const std::string tag = it->str();
    MetaTag m;
    for (auto a = std::sregex_iterator(tag.begin(), tag.end(), attr_re); a != std::sregex_iterator(); ++a) {
      const auto key = text::to_lower((*a)[1].str());
      std::string value = (*a)[2].matched ? (*a)[2].str() : (*a)[3].matched ? (*a)[3].str() : (*a)[4].str();
      if (key == "name" || key == "property") m.name = text::to_lower(value);
      if (key == "content") m.content = html_unescape(value);
    }
    if (!m.name.empty()) out.push_back(std::move(m));
  }
  return out;
}

}  // namespace detail

/// Meta tags consulted on a DOI landing page, in priority order.
inline const std::vector<std::string>& publication_meta_tags() {
  static const std::vector<std::string> tags{"citation_pdf_url", "citation_fulltext_html_url"};
  return tags;
}

/// First matching publication link on a landing page, by tag priority.
inline std::optional<std::pair<std::string, std::string>> find_publication_meta(const std::string& html) {
  const auto tags = detail::meta_tags(html);
  for (const auto& wanted : publication_meta_tags()) {
    for (const auto& t : tags) {
      if (t.name == wanted && !text::trim(t.content).empty()) return std::make_pair(wanted, std::string(text::trim(t.content)));
    }
  }
  return std::nullopt;
}

class Harvester {
 public:
  Harvester(HarvesterConfig config, http::Transport& transport)
      : config_(std::move(config)), transport_(transport) {}

  const HarvesterConfig& config() const { return config_; }
  std::filesystem::path manifest_path() const { return config_.state_dir / kManifestFile; }
  std::filesystem::path ledger_path() const { return config_.state_dir / kGovernanceLedger; }

  /// All pages merged, deduplicated by record id (first occurrence wins),
  /// sorted by record id and written to the manifest.
  std::vector<RecordMeta> fetch_community_records(const std::string& community_id,
                                                  std::size_t page_size = kDefaultPageSize) {
    require(!community_id.empty(), ErrorCode::kInvalidArgument, "empty community id");
    require(page_size > 0, ErrorCode::kInvalidArgument, "page size must be positive");
    std::map<std::string, RecordMeta> records;
    std::set<std::string> seen_urls;
    std::string url = config_.base_url + "/communities/" + http::url_encode(community_id) +
                      "/records?page=1&size=" + std::to_string(page_size);
    int page = 1;
    while (!url.empty() && seen_urls.insert(url).second) {
      const auto res = http::with_retry(config_.retry, [&] {
        auto r = transport_.get(url, auth_headers());
        http::raise_for_status(r, "community listing page " + std::to_string(page));
        return r;
      });
      const auto body = nlohmann::json::parse(res.body, nullptr, false);
      const nlohmann::json* hits = nullptr;
      std::string problem;
      if (body.is_discarded() || !body.is_object()) {
        problem = "response is not a JSON object";
      } else if (const auto* h = detail::child(body, {"hits", "hits"}); h != nullptr && h->is_array()) {
        hits = h;
      } else if (const auto* h2 = detail::child(body, {"hits"}); h2 != nullptr && h2->is_array()) {
        hits = h2;
      } else {
        problem = "response has no hits array";
      }
      if (hits != nullptr) {
        for (const auto& hit : *hits) {
          try {
            auto r = detail::parse_hit(hit, community_id);
            records.try_emplace(r.record_id, std::move(r));
          } catch (const std::string& what) {
            problem = what;
            break;
          }
        }
      }
      if (!problem.empty()) {
        const auto saved = save_malformed(community_id, page, res.body);
        fail(ErrorCode::kMalformedResponse, problem + " (payload saved to " + saved.string() + ")");
      }
      url = detail::string_at(body, {"links", "next"});
      if (url.empty()) url = detail::string_at(body, {"next"});
      ++page;
    }
    std::vector<RecordMeta> out;
    out.reserve(records.size());
    for (auto& [id, r] : records) out.push_back(std::move(r));
    write_manifest(community_id, out);
    return out;
  }

  /// Logged to the governance ledger.
  GovernanceDecision check_license(const RecordMeta& record, const std::set<std::string>& allow_list) {
    GovernanceDecision d{record.record_id, false, {}};
    if (!record.license_id || text::trim(*record.license_id).empty()) {
      d.reason = "missing license";
    } else {
      const auto id = text::to_lower(text::trim(*record.license_id));
      bool listed = false;
      for (const auto& a : allow_list) listed = listed || text::to_lower(a) == id;
      d.allowed = listed;
      d.reason = listed ? "license " + *record.license_id + " allowed"
                        : "license " + *record.license_id + " not in allow-list";
    }
    log_event({{"event", "license-check"},
               {"record_id", d.record_id},
               {"license_id", record.license_id ? nlohmann::json(*record.license_id) : nlohmann::json(nullptr)},
               {"allowed", d.allowed},
               {"reason", d.reason}});
    return d;
  }

  GovernanceDecision check_license(const RecordMeta& record) { return check_license(record, config_.allow_list); }

  /// Files land in dest_dir/record_id/. Any failure removes every file
  /// this call wrote before rethrowing.
  std::vector<ingest::FileEntry> download_record_files(const RecordMeta& record, const std::filesystem::path& dest_dir,
                                                       std::size_t max_parallel = 1) {
    require(max_parallel > 0, ErrorCode::kInvalidArgument, "max_parallel must be positive");
    const auto decision = check_license(record);
    if (!decision.allowed) {
      fail(ErrorCode::kGovernanceViolation, "record " + record.record_id + " not allowed: " + decision.reason);
    }
    for (const auto& f : record.files) {
      require(detail::safe_file_name(f.name), ErrorCode::kMalformedResponse, "unsafe file name " + f.name);
    }
    const auto dir = dest_dir / record.record_id;
    std::filesystem::create_directories(dir);

    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::optional<Error> first_error;
    std::vector<std::filesystem::path> written;
    auto worker = [&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= record.files.size()) return;
        {
          std::lock_guard lock(mu);
          if (first_error) return;
        }
        const auto& f = record.files[i];
        const auto target = dir / f.name;
        const auto part = dir / (f.name + ".part");
        try {
          {
            std::lock_guard lock(mu);
            written.push_back(part);
          }
          const auto res = http::with_retry(config_.retry, [&] {
            auto r = transport_.get(f.url, auth_headers());
            http::raise_for_status(r, "download of " + f.name);
            return r;
          });
          fs::write_file_atomic(part, res.body);
          if (!f.checksum.empty() && !hashing::checksum_matches(part, f.checksum)) {
            fail(ErrorCode::kChecksumMismatch, "checksum mismatch for " + record.record_id + "/" + f.name);
          }
          {
            std::lock_guard lock(mu);
            written.push_back(target);
          }
          std::filesystem::rename(part, target);
          log_event({{"event", "download"},
                     {"record_id", record.record_id},
                     {"file", f.name},
                     {"bytes", res.body.size()},
                     {"sha256", hashing::sha256_hex(res.body)}});
        } catch (const Error& e) {
          std::lock_guard lock(mu);
          if (!first_error) first_error = e;
        } catch (const std::exception& e) {
          std::lock_guard lock(mu);
          if (!first_error) first_error = Error(ErrorCode::kIoFailure, e.what());
        }
      }
    };
    const std::size_t n_workers = std::min(max_parallel, std::max<std::size_t>(1, record.files.size()));
    if (n_workers <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
    if (first_error) {
      std::error_code ec;
      for (const auto& p : written) std::filesystem::remove(p, ec);
      if (std::filesystem::is_empty(dir, ec)) std::filesystem::remove(dir, ec);
      log_event({{"event", "download-failed"}, {"record_id", record.record_id}, {"error", first_error->what()}});
      throw *first_error;
    }
    std::vector<ingest::FileEntry> out;
    for (const auto& f : record.files) out.push_back(ingest::FileEntry::from_path(record.record_id, dir / f.name));
    return out;
  }

  /// Open-access lookup first, then the DOI landing page's meta tags.
  /// Nothing is downloaded for records the allow-list rejects.
  PublicationRef resolve_publication(const RecordMeta& record, const std::filesystem::path& dest_dir) {
    PublicationRef none{record.record_id, PublicationSource::kNone, std::nullopt, std::nullopt};
    if (!record.doi || text::trim(*record.doi).empty()) return none;
    if (!check_license(record).allowed) return none;
    const std::string doi(text::trim(*record.doi));

    const auto lookup = http::with_retry(config_.retry, [&] {
      auto r = transport_.get(config_.oa_base_url + "/v2/" + doi + "?email=" + http::url_encode(config_.contact_email));
      if (r.status >= 500 || r.status == 429) http::raise_for_status(r, "open-access lookup");
      return r;
    });
    if (lookup.ok()) {
      const auto j = nlohmann::json::parse(lookup.body, nullptr, false);
      if (!j.is_discarded()) {
        const auto pdf = detail::string_at(j, {"best_oa_location", "url_for_pdf"});
        if (!pdf.empty()) {
          if (auto path = fetch_publication(record, dest_dir, pdf, "publication.pdf")) {
            return PublicationRef{record.record_id, PublicationSource::kOpenAccessLookup, pdf, *path};
          }
        }
      }
    }

    const auto landing = http::with_retry(config_.retry, [&] {
      auto r = transport_.get(config_.doi_resolver + "/" + doi);
      if (r.status >= 500 || r.status == 429) http::raise_for_status(r, "DOI landing page");
      return r;
    });
    if (landing.ok()) {
      if (const auto meta = find_publication_meta(landing.body)) {
        const auto name = meta->first == "citation_pdf_url" ? "publication.pdf" : "publication.html";
        if (auto path = fetch_publication(record, dest_dir, meta->second, name)) {
          return PublicationRef{record.record_id, PublicationSource::kHtmlMeta, meta->second, *path};
        }
      }
    }
    return none;
  }

 private:
  http::Headers auth_headers() const {
    if (config_.token.empty()) return {};
    return {{"Authorization", "Bearer " + config_.token}};
  }

  std::optional<std::filesystem::path> fetch_publication(const RecordMeta& record, const std::filesystem::path& dest_dir,
                                                         const std::string& url, const std::string& name) {
    const auto res = http::with_retry(config_.retry, [&] {
      auto r = transport_.get(url);
      if (r.status >= 500 || r.status == 429) http::raise_for_status(r, "publication download");
      return r;
    });
    if (!res.ok()) return std::nullopt;
    const auto path = dest_dir / record.record_id / name;
    std::filesystem::create_directories(path.parent_path());
    fs::write_file_atomic(path, res.body);
    log_event({{"event", "publication"}, {"record_id", record.record_id}, {"url", url}, {"bytes", res.body.size()}});
    return path;
  }

  void write_manifest(const std::string& community_id, const std::vector<RecordMeta>& records) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : records) arr.push_back(to_json(r));
    const nlohmann::ordered_json doc{{"community_id", community_id}, {"record_count", records.size()}, {"records", arr}};
    std::lock_guard lock(write_mu_);
    std::filesystem::create_directories(config_.state_dir);
    fs::write_file_atomic(manifest_path(), doc.dump(2) + "\n");
  }

  std::filesystem::path save_malformed(const std::string& community_id, int page, const std::string& body) {
    const auto path = config_.state_dir / "malformed" / (community_id + "-page-" + std::to_string(page) + ".json");
    std::lock_guard lock(write_mu_);
    std::filesystem::create_directories(path.parent_path());
    fs::write_file_atomic(path, body);
    return path;
  }

  void log_event(const nlohmann::json& event) {
    std::lock_guard lock(write_mu_);
    std::filesystem::create_directories(config_.state_dir);
    fs::append_line(ledger_path(), event.dump());
  }

  HarvesterConfig config_;
  http::Transport& transport_;
  std::mutex write_mu_;
};

}  // namespace datascout::harvester
