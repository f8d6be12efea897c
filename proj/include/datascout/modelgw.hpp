// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "datascout/core/error.hpp"
#include "datascout/core/hash.hpp"
#include "datascout/core/http.hpp"
#include "datascout/core/stopwords.hpp"
#include "datascout/core/text.hpp"
#include "datascout/prompts.hpp"

namespace datascout::modelgw {

struct GatewayConfig {
  std::string chat_endpoint;
  std::string embed_endpoint;
  std::string caption_endpoint;
  std::string api_token;
  double temperature = 0.5;
  int max_new_tokens = 1024;
  std::size_t context_budget_tokens = 8192;
  int retry_count = 3;
  std::size_t dims = 768;
  std::uint64_t embed_seed = 0x5eedULL;
  double requests_per_second = 0.0;  // 0 disables rate limiting
  std::chrono::milliseconds initial_backoff{1000};

  void validate() const {
    require(temperature >= 0.0 && temperature <= 2.0, ErrorCode::kInvalidArgument, "temperature outside [0, 2]");
    require(retry_count >= 0, ErrorCode::kInvalidArgument, "retry_count must be >= 0");
    require(dims > 0, ErrorCode::kInvalidArgument, "dims must be positive");
    require(context_budget_tokens > 0, ErrorCode::kInvalidArgument, "context budget must be positive");
  }

  /// Token from DATASCOUT_MODEL_TOKEN when not set explicitly.
  static GatewayConfig from_json(const nlohmann::json& j) {
    GatewayConfig c;
    c.chat_endpoint = j.value("chat_endpoint", c.chat_endpoint);
    c.embed_endpoint = j.value("embed_endpoint", c.embed_endpoint);
    c.caption_endpoint = j.value("caption_endpoint", c.caption_endpoint);
    c.api_token = j.value("api_token", std::string{});
    if (c.api_token.empty()) {
      if (const char* env = std::getenv("DATASCOUT_MODEL_TOKEN")) c.api_token = env;
    }
    c.temperature = j.value("temperature", c.temperature);
    c.max_new_tokens = j.value("max_new_tokens", c.max_new_tokens);
    c.context_budget_tokens = j.value("context_budget_tokens", c.context_budget_tokens);
    c.retry_count = j.value("retry_count", c.retry_count);
    c.dims = j.value("dims", c.dims);
    c.embed_seed = j.value("embed_seed", c.embed_seed);
    c.requests_per_second = j.value("requests_per_second", c.requests_per_second);
    c.initial_backoff = std::chrono::milliseconds(j.value("initial_backoff_ms", static_cast<long>(c.initial_backoff.count())));
    c.validate();
    return c;
  }
};

/// Per-call overrides. Unset fields fall back to the gateway configuration.
struct ChatParams {
  std::optional<double> temperature;
  std::optional<int> max_new_tokens;
  std::optional<int> min_new_tokens;
  std::optional<std::string> decoding_method;
  std::optional<std::uint64_t> random_seed;
  std::optional<double> repetition_penalty;
  std::optional<double> top_p;
  std::vector<std::string> stop_sequences;
};

struct EmbeddingVector {
  std::vector<double> values;
  bool normalized = false;

  std::size_t dims() const { return values.size(); }
};

inline double l2_norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

/// Scales to unit length; a zero vector becomes the first basis vector.
inline void normalize_in_place(std::vector<double>& v) {
  const double n = l2_norm(v);
  if (n == 0.0) {
    std::fill(v.begin(), v.end(), 0.0);
    if (!v.empty()) v[0] = 1.0;
    return;
  }
  for (double& x : v) x /= n;
}

// ---------------------------------------------------------------------------
// Backends

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(const std::string& prompt, const ChatParams& params) = 0;
  virtual std::string identity() const = 0;
};

class EmbedBackend {
 public:
  virtual ~EmbedBackend() = default;
  /// Raw (not necessarily normalized) vectors, one per input.
  virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& inputs) = 0;
  virtual std::string identity() const = 0;
};

class CaptionBackend {
 public:
  virtual ~CaptionBackend() = default;
  virtual std::string caption(std::string_view image_bytes) = 0;
};

namespace stub {

inline std::string after_last(std::string_view s, std::string_view marker) {
  const auto pos = s.rfind(marker);
  return pos == std::string_view::npos ? std::string(s) : std::string(s.substr(pos + marker.size()));
}

inline std::string between(std::string_view s, std::string_view open, std::string_view close) {
  auto a = s.find(open);
  if (a == std::string_view::npos) return {};
  a += open.size();
  auto b = s.rfind(close);
  if (b == std::string_view::npos || b < a) return std::string(s.substr(a));
  return std::string(s.substr(a, b - a));
}

inline std::string bullets(const std::vector<std::string>& items) {
  std::vector<std::string> lines;
  for (const auto& s : items) lines.push_back("- " + s);
  return text::join(lines, "\n");
}

inline std::string first_sentences(std::string_view payload, std::size_t n) {
  auto s = text::sentences(payload);
  if (s.size() > n) s.resize(n);
  return bullets(s);
}

inline std::string merge_lines(std::string_view payload) {
  std::vector<std::string> seen;
  for (const auto& line : text::sentences(payload)) {
    if (std::find(seen.begin(), seen.end(), line) == seen.end()) seen.push_back(line);
  }
  return bullets(seen);
}

inline std::string guess_domain(std::string_view body) {
  struct Rule {
    std::string_view domain;
    std::vector<std::string_view> cues;
  };
  static const std::vector<Rule> kRules = {
      {"Chemistry", {"catalyst", "catalysis", "chemical", "molecule", "molecular", "reaction", "synthesis", "oxide", "xrd", "spectra"}},
      {"Materials Science", {"material", "materials", "alloy", "crystal", "polymer", "nanoparticle"}},
      {"Biology", {"species", "gene", "protein", "cell", "flower", "iris", "sepal", "petal", "organism"}},
      {"Physics", {"quantum", "particle", "optical", "laser", "magnetic", "energy"}},
      {"Medicine", {"patient", "clinical", "disease", "medical", "hospital"}},
      {"Earth Science", {"climate", "ocean", "soil", "weather", "geology", "seismic"}},
      {"Computer Science", {"image", "images", "pixel", "neural", "dataset", "benchmark", "software"}},
      {"Economics", {"price", "prices", "sales", "market", "financial", "loan", "bank"}},
  };
  const auto counts = text::content_word_counts(body);
  std::string_view best = "General";
  std::size_t best_score = 0;
  for (const auto& rule : kRules) {
    std::size_t score = 0;
    for (const auto& [w, c] : counts) {
      if (std::find(rule.cues.begin(), rule.cues.end(), w) != rule.cues.end()) score += c;
    }
    if (score > best_score) {
      best = rule.domain;
      best_score = score;
    }
  }
  return std::string(best);
}

inline std::string report_reply(std::string_view prompt) {
  const std::string info = between(prompt, "Consider the following additional information ", ". If possible from the labels");
  auto sentences = text::sentences(info);
  if (sentences.size() > 3) sentences.resize(3);
  std::string description = text::join(sentences, " ");
  if (description.empty()) description = "Dataset without further analysis results.";
  std::vector<std::string> keywords;
  for (const auto& [w, c] : text::content_word_counts(info)) {
    if (keywords.size() == 5) break;
    keywords.push_back(w);
  }
  return "Description: " + description + "\nDomain: " + guess_domain(info) + "\nKeywords: " + text::join(keywords, ", ");
}

inline std::string questions_reply(std::string_view prompt) {
  const std::string summary = between(prompt, "about a dataset: ", ". Based on the summary of the paper");
  std::size_t n = 15;
  const auto list_pos = prompt.find("create a list of ");
  if (list_pos != std::string_view::npos) {
    long long parsed = 0;
    auto rest = prompt.substr(list_pos + 17);
    if (text::parse_integer(rest.substr(0, rest.find(' ')), parsed) && parsed > 0) n = static_cast<std::size_t>(parsed);
  }
  auto sentences = text::sentences(summary);
  if (sentences.empty()) sentences.push_back(summary);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string s = sentences[i % sentences.size()];
    while (!s.empty() && (s.back() == '.' || s.back() == '!' || s.back() == '?')) s.pop_back();
    static constexpr std::string_view kStems[] = {
        "Which dataset supports the finding that ", "What measurements show that ",
        "Where can I find the data behind the claim that ", "Which records document that "};
    out += std::to_string(i + 1) + ". " + std::string(kStems[(i / sentences.size()) % 4]) + s + "?\n";
  }
  return out;
}

/// Examples-only generation script: each column sampled uniformly between
/// the example extremes (numeric) or among the example values (otherwise).
inline std::string between_first(std::string_view s, std::string_view open, std::string_view close) {
  auto a = s.find(open);
  if (a == std::string_view::npos) return {};
  a += open.size();
  const auto b = s.find(close, a);
  return std::string(s.substr(a, b == std::string_view::npos ? std::string_view::npos : b - a));
}

/// Script that samples numeric columns from a normal clipped to the stated
/// range when statistics are given, otherwise uniformly between the example
/// extremes; other columns follow stated frequencies or the examples.
inline std::string generation_reply(std::string_view prompt) {
  const std::string examples = between_first(prompt, "Examples here ", ".\nNow, generate python code");
  const std::string output = between_first(prompt, "Save the pandas dataframe in a csv file ", ".\n");
  const std::string stats = between_first(prompt, "statistical information contained in ", ".\nSave the pandas");
  std::size_t n = 100;
  const auto gen = prompt.find("Generate ");
  if (gen != std::string_view::npos) {
    long long parsed = 0;
    auto rest = prompt.substr(gen + 9);
    if (text::parse_integer(rest.substr(0, rest.find(' ')), parsed) && parsed > 0) n = static_cast<std::size_t>(parsed);
  }
  const nlohmann::json ex = examples;
  const nlohmann::json st = stats;
  const nlohmann::json out = output;
  std::string script =
      "import csv, io, json, random, re\n"
      "random.seed(42)\n"
      "EXAMPLES = " + ex.dump() + "\n"
      "STATS = " + st.dump() + "\n"
      "OUTPUT = " + out.dump() + "\n"
      "N = " + std::to_string(n) + "\n"
      "rows = list(csv.reader(io.StringIO(EXAMPLES.strip())))\n"
      "header, body = rows[0], rows[1:]\n"
      "cols = list(zip(*body))\n"
      "stats = {}\n"
      "for line in STATS.splitlines():\n"
      "    m = re.match(r'\\s*Column (\"(?:[^\"\\\\]|\\\\.)*\") \\(([^)]*)\\): (\\{.*\\})\\s*$', line)\n"
      "    if m:\n"
      "        stats[json.loads(m.group(1))] = (m.group(2), json.loads(m.group(3)))\n"
      "def num(v):\n"
      "    try:\n"
      "        return float(v)\n"
      "    except ValueError:\n"
      "        return None\n"
      "def from_stats(kind, info):\n"
      "    if kind.startswith('numeric') and 'mean' in info:\n"
      "        mean, sd, lo, hi = info['mean'], info['std'], info['min'], info['max']\n"
      "        disc = kind == 'numeric-discrete'\n"
      "        def draw():\n"
      "            v = min(max(random.gauss(mean, sd), lo), hi)\n"
      "            return str(int(round(v))) if disc else repr(v)\n"
      "        return draw\n"
      "    if 'values' in info and info['values']:\n"
      "        vals, weights = list(info['values'].keys()), list(info['values'].values())\n"
      "        return lambda: random.choices(vals, weights)[0]\n"
      "    return None\n"
      "samplers = []\n"
      "for name, col in zip(header, cols):\n"
      "    s = from_stats(*stats[name]) if name in stats else None\n"
      "    if s is None:\n"
      "        vals = [num(v) for v in col]\n"
      "        if all(v is not None for v in vals):\n"
      "            lo, hi = min(vals), max(vals)\n"
      "            s = lambda lo=lo, hi=hi: repr(random.uniform(lo, hi))\n"
      "        else:\n"
      "            s = lambda col=col: random.choice(col)\n"
      "    samplers.append(s)\n"
      "with open(OUTPUT, 'w', newline='') as f:\n"
      "    w = csv.writer(f)\n"
      "    w.writerow(header)\n"
      "    for _ in range(N):\n"
      "        w.writerow([s() for s in samplers])\n";
  return "Here is the script.\n```python\n" + script + "```\n";
}

}  // namespace stub

/// Deterministic offline chat backend. Recognised requests:
///   "SUMMARIZE:" payload    -> its first three sentences as bullets
///   "MERGE:" payload        -> every distinct sentence/line as bullets
///   overarching description -> Description/Domain/Keywords sections
///   question generation     -> numbered questions built from the summary
///   generation agent prompt -> an examples-only sampling script
/// Anything else echoes the first three sentences as bullets.
class StubChat final : public ChatBackend {
 public:
  std::string complete(const std::string& prompt, const ChatParams&) override {
    if (prompt.find(prompts::kMergeMarker) != std::string::npos) {
      return stub::merge_lines(stub::after_last(prompt, prompts::kMergeMarker));
    }
    if (prompt.find(prompts::kSummarizeMarker) != std::string::npos) {
      return stub::first_sentences(stub::after_last(prompt, prompts::kSummarizeMarker), 3);
    }
    if (prompt.rfind("You are a helpful data analyst.", 0) == 0) return stub::report_reply(prompt);
    if (prompt.rfind("Here you have the summary of a paper about a dataset:", 0) == 0) {
      return stub::questions_reply(prompt);
    }
    if (prompt.find("generate synthetic data from a query") != std::string::npos) {
      return stub::generation_reply(prompt);
    }
    return stub::first_sentences(prompt, 3);
  }

  std::string identity() const override { return "stub-chat/1"; }
};

/// Replays canned replies in order; the last one repeats once exhausted.
class ScriptedChat final : public ChatBackend {
 public:
  explicit ScriptedChat(std::vector<std::string> replies) : replies_(replies.begin(), replies.end()) {}

  std::string complete(const std::string& prompt, const ChatParams&) override {
    std::lock_guard lock(mu_);
    prompts_.push_back(prompt);
    require(!replies_.empty(), ErrorCode::kGatewayFailure, "scripted chat has no replies");
    std::string reply = replies_.front();
    if (replies_.size() > 1) replies_.pop_front();
    return reply;
  }

  std::vector<std::string> prompts() const {
    std::lock_guard lock(mu_);
    return prompts_;
  }

  std::string identity() const override { return "scripted-chat"; }

 private:
  mutable std::mutex mu_;
  std::deque<std::string> replies_;
  std::vector<std::string> prompts_;
};

/// Wraps an arbitrary callable; handy for failure injection.
class FunctionChat final : public ChatBackend {
 public:
  explicit FunctionChat(std::function<std::string(const std::string&)> fn) : fn_(std::move(fn)) {}
  std::string complete(const std::string& prompt, const ChatParams&) override { return fn_(prompt); }
  std::string identity() const override { return "function-chat"; }

 private:
  std::function<std::string(const std::string&)> fn_;
};

/// Signed feature hashing of character trigrams. Each lowercase word is
/// padded as "<word>" and every 3-byte window is hashed (seeded FNV-1a) into
/// one of `dims` buckets with a sign taken from the hash's top bit.
class StubEmbedder final : public EmbedBackend {
 public:
  StubEmbedder(std::size_t dims, std::uint64_t seed) : dims_(dims), seed_(seed) {}

  std::vector<std::vector<double>> embed(const std::vector<std::string>& inputs) override {
    std::vector<std::vector<double>> out;
    out.reserve(inputs.size());
    for (const auto& s : inputs) out.push_back(features(s));
    return out;
  }

  std::vector<double> features(std::string_view s) const {
    std::vector<double> v(dims_, 0.0);
    for (const auto& w : text::words(s)) {
      const std::string padded = "<" + w + ">";
      for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
        const auto h = hashing::fnv1a64(std::string_view(padded).substr(i, 3), seed_);
        const auto bucket = static_cast<std::size_t>(h % dims_);
        v[bucket] += (h >> 63) ? -1.0 : 1.0;
      }
    }
    return v;
  }

  std::string identity() const override {
    return "stub-trigram-hash/dims=" + std::to_string(dims_) + "/seed=" + std::to_string(seed_);
  }

 private:
  std::size_t dims_;
  std::uint64_t seed_;
};

class StubCaptioner final : public CaptionBackend {
 public:
  std::string caption(std::string_view image_bytes) override {
    return "image:" + hashing::sha256_hex(image_bytes).substr(0, 8);
  }
};

namespace detail {

inline http::Headers auth_headers(const std::string& token) {
  http::Headers h;
  if (!token.empty()) h.emplace_back("Authorization", "Bearer " + token);
  return h;
}

/// 5xx and 429 are retryable transport errors, other failures are final.
inline void check_model_status(const http::Response& res, const std::string& what) {
  if (res.ok()) return;
  if (res.status >= 500 || res.status == 429) {
    fail(ErrorCode::kTransportFailure, what + " returned HTTP " + std::to_string(res.status));
  }
  fail(ErrorCode::kGatewayFailure, what + " returned HTTP " + std::to_string(res.status) + ": " + res.body);
}

inline nlohmann::json parse_body(const http::Response& res, const std::string& what) {
  try {
    return nlohmann::json::parse(res.body);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kGatewayFailure, what + " returned invalid JSON: " + e.what());
  }
}

}  // namespace detail

/// Chat-completions style endpoint.
class HttpChat final : public ChatBackend {
 public:
  HttpChat(std::string endpoint, std::shared_ptr<http::Transport> transport, std::string token)
      : endpoint_(std::move(endpoint)), transport_(std::move(transport)), token_(std::move(token)) {}

  std::string complete(const std::string& prompt, const ChatParams& params) override {
    nlohmann::json body = {{"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})}};
    if (params.temperature) body["temperature"] = *params.temperature;
    if (params.max_new_tokens) body["max_tokens"] = *params.max_new_tokens;
    if (params.min_new_tokens) body["min_tokens"] = *params.min_new_tokens;
    if (params.decoding_method) body["decoding_method"] = *params.decoding_method;
    if (params.random_seed) body["seed"] = *params.random_seed;
    if (params.repetition_penalty) body["repetition_penalty"] = *params.repetition_penalty;
    if (params.top_p) body["top_p"] = *params.top_p;
    if (!params.stop_sequences.empty()) body["stop"] = params.stop_sequences;
    auto res = transport_->send(http::Request{"POST", endpoint_, detail::auth_headers(token_), body.dump(), "application/json"});
    detail::check_model_status(res, "chat endpoint");
    const auto j = detail::parse_body(res, "chat endpoint");
    try {
      if (j.contains("choices")) return j.at("choices").at(0).at("message").at("content").get<std::string>();
      return j.at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kGatewayFailure, std::string("chat reply lacks content: ") + e.what());
    }
  }

  std::string identity() const override { return "http-chat:" + endpoint_; }

 private:
  std::string endpoint_;
  std::shared_ptr<http::Transport> transport_;
  std::string token_;
};

class HttpEmbedder final : public EmbedBackend {
 public:
  HttpEmbedder(std::string endpoint, std::shared_ptr<http::Transport> transport, std::string token)
      : endpoint_(std::move(endpoint)), transport_(std::move(transport)), token_(std::move(token)) {}

  std::vector<std::vector<double>> embed(const std::vector<std::string>& inputs) override {
    nlohmann::json body = {{"input", inputs}};
    auto res = transport_->send(http::Request{"POST", endpoint_, detail::auth_headers(token_), body.dump(), "application/json"});
    detail::check_model_status(res, "embed endpoint");
    const auto j = detail::parse_body(res, "embed endpoint");
    std::vector<std::vector<double>> out;
    try {
      for (const auto& d : j.at("data")) out.push_back(d.at("embedding").get<std::vector<double>>());
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kGatewayFailure, std::string("embed reply malformed: ") + e.what());
    }
    require(out.size() == inputs.size(), ErrorCode::kGatewayFailure, "embed reply count mismatch");
    return out;
  }

  std::string identity() const override { return "http-embed:" + endpoint_; }

 private:
  std::string endpoint_;
  std::shared_ptr<http::Transport> transport_;
  std::string token_;
};

/// POSTs raw image bytes, expects {"caption": "..."}.
class HttpCaptioner final : public CaptionBackend {
 public:
  HttpCaptioner(std::string endpoint, std::shared_ptr<http::Transport> transport, std::string token)
      : endpoint_(std::move(endpoint)), transport_(std::move(transport)), token_(std::move(token)) {}

  std::string caption(std::string_view image_bytes) override {
    auto res = transport_->send(http::Request{"POST", endpoint_, detail::auth_headers(token_), std::string(image_bytes),
                                              "application/octet-stream"});
    detail::check_model_status(res, "caption endpoint");
    const auto j = detail::parse_body(res, "caption endpoint");
    const auto caption = j.value("caption", std::string{});
    require(!caption.empty(), ErrorCode::kGatewayFailure, "empty caption");
    return caption;
  }

 private:
  std::string endpoint_;
  std::shared_ptr<http::Transport> transport_;
  std::string token_;
};

/// Token bucket; capacity equals one second of tokens (at least one).
class RateLimiter {
 public:
  explicit RateLimiter(double per_second) : rate_(per_second), tokens_(std::max(1.0, per_second)) {}

  void acquire() {
    if (rate_ <= 0) return;
    std::unique_lock lock(mu_);
    while (true) {
      refill();
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      const auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
      lock.unlock();
      std::this_thread::sleep_for(wait);
      lock.lock();
    }
  }

 private:
  void refill() {
    const auto now = std::chrono::steady_clock::now();
    const double elapsed = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    tokens_ = std::min(std::max(1.0, rate_), tokens_ + elapsed * rate_);
  }

  double rate_;
  double tokens_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
  std::mutex mu_;
};

// ---------------------------------------------------------------------------

/// Uniform front door to the chat, embedding and captioning backends.
/// Shareable across threads as long as the backends are.
class Gateway {
 public:
  Gateway(GatewayConfig config, std::shared_ptr<ChatBackend> chat, std::shared_ptr<EmbedBackend> embedder,
          std::shared_ptr<CaptionBackend> captioner)
      : config_(std::move(config)),
        chat_(std::move(chat)),
        embedder_(std::move(embedder)),
        captioner_(std::move(captioner)),
        limiter_(std::make_shared<RateLimiter>(config_.requests_per_second)) {
    config_.validate();
  }

  static Gateway stub(GatewayConfig config = {}) {
    auto embedder = std::make_shared<StubEmbedder>(config.dims, config.embed_seed);
    return Gateway(config, std::make_shared<StubChat>(), embedder, std::make_shared<StubCaptioner>());
  }

  /// Remote backends for the configured endpoints; endpoints left empty fall
  /// back to the stub implementation.
  static Gateway remote(GatewayConfig config, std::shared_ptr<http::Transport> transport) {
    std::shared_ptr<ChatBackend> chat = config.chat_endpoint.empty()
                                            ? std::shared_ptr<ChatBackend>(std::make_shared<StubChat>())
                                            : std::make_shared<HttpChat>(config.chat_endpoint, transport, config.api_token);
    std::shared_ptr<EmbedBackend> embed =
        config.embed_endpoint.empty()
            ? std::shared_ptr<EmbedBackend>(std::make_shared<StubEmbedder>(config.dims, config.embed_seed))
            : std::make_shared<HttpEmbedder>(config.embed_endpoint, transport, config.api_token);
    std::shared_ptr<CaptionBackend> caption =
        config.caption_endpoint.empty()
            ? std::shared_ptr<CaptionBackend>(std::make_shared<StubCaptioner>())
            : std::make_shared<HttpCaptioner>(config.caption_endpoint, transport, config.api_token);
    return Gateway(std::move(config), chat, embed, caption);
  }

  Gateway with_chat(std::shared_ptr<ChatBackend> chat) const {
    Gateway g = *this;
    g.chat_ = std::move(chat);
    return g;
  }

  const GatewayConfig& config() const { return config_; }
  std::size_t dims() const { return config_.dims; }
  std::string embedder_identity() const { return embedder_->identity(); }
  std::string chat_identity() const { return chat_->identity(); }

  std::string chat(const std::string& prompt, const ChatParams& overrides = {}) const {
    const auto tokens = text::count_tokens(prompt);
    if (tokens > config_.context_budget_tokens) {
      fail(ErrorCode::kOverBudget, "prompt has " + std::to_string(tokens) + " tokens, budget is " +
                                       std::to_string(config_.context_budget_tokens));
    }
    ChatParams params = overrides;
    if (!params.temperature) params.temperature = config_.temperature;
    if (!params.max_new_tokens) params.max_new_tokens = config_.max_new_tokens;
    require(*params.temperature >= 0.0 && *params.temperature <= 2.0, ErrorCode::kInvalidArgument,
            "temperature outside [0, 2]");
    return call("chat", [&] { return chat_->complete(prompt, params); });
  }

  EmbeddingVector embed(const std::string& input) const {
    auto raw = embed_raw({input});
    return finish(std::move(raw.front()));
  }

  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& inputs) const {
    std::vector<EmbeddingVector> out;
    for (auto& v : embed_raw(inputs)) out.push_back(finish(std::move(v)));
    return out;
  }

  std::string caption(std::string_view image_bytes) const {
    require(!image_bytes.empty(), ErrorCode::kInvalidInput, "zero-length image");
    auto c = call("caption", [&] { return captioner_->caption(image_bytes); });
    require(!c.empty(), ErrorCode::kGatewayFailure, "empty caption");
    return c;
  }

 private:
  std::vector<std::vector<double>> embed_raw(const std::vector<std::string>& inputs) const {
    auto out = call("embed", [&] { return embedder_->embed(inputs); });
    for (const auto& v : out) {
      require(v.size() == config_.dims, ErrorCode::kDimMismatch,
              "embedder returned " + std::to_string(v.size()) + " dims, configured " + std::to_string(config_.dims));
    }
    return out;
  }

  static EmbeddingVector finish(std::vector<double> v) {
    normalize_in_place(v);
    return EmbeddingVector{std::move(v), true};
  }

  template <typename Fn>
  auto call(const char* what, Fn&& fn) const -> decltype(fn()) {
    http::RetryPolicy policy{std::max(1, config_.retry_count), config_.initial_backoff};
    try {
      return http::with_retry(policy, [&] {
        limiter_->acquire();
        return fn();
      });
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kTransportFailure) {
        fail(ErrorCode::kGatewayFailure, std::string(what) + " failed after retries: " + e.what());
      }
      throw;
    }
  }

  GatewayConfig config_;
  std::shared_ptr<ChatBackend> chat_;
  std::shared_ptr<EmbedBackend> embedder_;
  std::shared_ptr<CaptionBackend> captioner_;
  std::shared_ptr<RateLimiter> limiter_;
};

}  // namespace datascout::modelgw
