#pragma once

// Chat-completion client with an on-disk response cache, per-provider
// request/response adapters, exponential backoff and an injectable
// transport so tests never touch the network.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <thread>

#include <openssl/evp.h>

#include <json.hpp>

#include "matchup/corpus_io.hpp"
#include "matchup/error.hpp"

namespace matchup {

struct ModelSpec {
  std::string provider_id;  ///< "openai" or "gemini"
  std::string model_name;
  std::string endpoint_url;
  std::string auth_env_var;
  int request_timeout = 120;  ///< seconds
  int max_retries = 3;
  /// Requested sampling temperature; unset for providers that reject it.
  std::optional<double> temperature = 0.0;

  void validate() const {
    static const std::regex url(R"(^https?://[A-Za-z0-9.\-]+(:\d+)?(/\S*)?$)");
    if (!std::regex_match(endpoint_url, url)) throw Error("endpoint_url '" + endpoint_url + "' is not a valid URL");
    if (max_retries < 0) throw Error("max_retries must be >= 0");
    if (model_name.empty()) throw Error("model_name must be set");
  }
};

inline ModelSpec model_spec_from_json(const json& j) {
  ModelSpec s;
  s.provider_id = j.at("provider_id").get<std::string>();
  s.model_name = j.at("model_name").get<std::string>();
  s.endpoint_url = j.at("endpoint_url").get<std::string>();
  s.auth_env_var = j.value("auth_env_var", std::string());
  s.request_timeout = j.value("request_timeout", 120);
  s.max_retries = j.value("max_retries", 3);
  if (j.contains("temperature")) {
    s.temperature = j["temperature"].is_null() ? std::nullopt : std::optional<double>(j["temperature"].get<double>());
  }
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Hashing

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

/// SHA-256 over model name and prompt, separated by a NUL byte.
inline std::string cache_key(std::string_view model_name, std::string_view prompt) {
  std::string buf;
  buf.reserve(model_name.size() + prompt.size() + 1);
  buf.append(model_name);
  buf.push_back('\0');
  buf.append(prompt);
  return sha256_hex(buf);
}

// ---------------------------------------------------------------------------
// Cache

struct TokenUsage {
  long long prompt_tokens = 0;
  long long completion_tokens = 0;
};

struct CachedResponse {
  std::string cache_key;
  std::string model_name;
  std::string raw_text;
  std::string timestamp;
  std::optional<TokenUsage> token_usage;
  json sampling = json::object();
};

inline json to_json(const CachedResponse& c) {
  json j{{"cache_key", c.cache_key},
         {"model_name", c.model_name},
         {"raw_text", c.raw_text},
         {"timestamp", c.timestamp},
         {"sampling", c.sampling},
         {"token_usage", nullptr}};
  if (c.token_usage) {
    j["token_usage"] = {{"prompt_tokens", c.token_usage->prompt_tokens},
                        {"completion_tokens", c.token_usage->completion_tokens}};
  }
  return j;
}

inline CachedResponse cached_response_from_json(const json& j) {
  CachedResponse c;
  c.cache_key = j.at("cache_key").get<std::string>();
  c.model_name = j.value("model_name", std::string());
  c.raw_text = j.at("raw_text").get<std::string>();
  c.timestamp = j.value("timestamp", std::string());
  c.sampling = j.value("sampling", json::object());
  if (j.contains("token_usage") && j["token_usage"].is_object()) {
    c.token_usage = TokenUsage{j["token_usage"].value("prompt_tokens", 0LL),
                               j["token_usage"].value("completion_tokens", 0LL)};
  }
  return c;
}

/// One JSON file per cache key under a directory.
class ResponseCache {
public:
  explicit ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path path_for(const std::string& key) const { return dir_ / (key + ".json"); }

  std::optional<CachedResponse> get(const std::string& key) const {
    const auto p = path_for(key);
    if (!std::filesystem::is_regular_file(p)) return std::nullopt;
    return cached_response_from_json(json::parse(read_file(p)));
  }

  void put(const CachedResponse& c) {
    std::mutex& m = lock_for(c.cache_key);
    std::lock_guard<std::mutex> guard(m);
    std::filesystem::create_directories(dir_);
    const auto final_path = path_for(c.cache_key);
    auto tmp = final_path;
    tmp += ".tmp";
    write_file(tmp, canonical_dump(to_json(c)));
    std::filesystem::rename(tmp, final_path);
  }

private:
  std::mutex& lock_for(const std::string& key) {
    std::lock_guard<std::mutex> guard(table_mutex_);
    return locks_[key];
  }

  std::filesystem::path dir_;
  std::mutex table_mutex_;
  std::map<std::string, std::mutex> locks_;
};

// ---------------------------------------------------------------------------
// Transport and provider adapters

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  int timeout_seconds = 120;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Performs one POST. Throws NetworkError on connection-level failure.
using Transport = std::function<HttpResponse(const HttpRequest&)>;

struct ProviderReply {
  std::string text;
  std::optional<TokenUsage> usage;
};

inline HttpRequest build_provider_request(const ModelSpec& spec, const std::string& prompt, const std::string& key) {
  HttpRequest req;
  req.url = spec.endpoint_url;
  req.timeout_seconds = spec.request_timeout;
  req.headers.emplace_back("Content-Type", "application/json");
  json body;
  if (spec.provider_id == "gemini") {
    body = {{"contents", json::array({{{"role", "user"}, {"parts", json::array({{{"text", prompt}}})}}})}};
    if (spec.temperature) body["generationConfig"] = {{"temperature", *spec.temperature}};
    if (!key.empty()) req.headers.emplace_back("x-goog-api-key", key);
  } else if (spec.provider_id == "openai") {
    body = {{"model", spec.model_name}, {"messages", json::array({{{"role", "user"}, {"content", prompt}}})}};
    if (spec.temperature) body["temperature"] = *spec.temperature;
    if (!key.empty()) req.headers.emplace_back("Authorization", "Bearer " + key);
  } else {
    throw Error("unknown provider '" + spec.provider_id + "'");
  }
  req.body = body.dump();
  return req;
}

inline ProviderReply parse_provider_reply(const ModelSpec& spec, const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error&) {
    throw ProviderError(200, body);
  }
  ProviderReply r;
  try {
    if (spec.provider_id == "gemini") {
      for (const auto& part : j.at("candidates").at(0).at("content").at("parts")) {
        r.text += part.value("text", std::string());
      }
      if (j.contains("usageMetadata")) {
        const auto& u = j["usageMetadata"];
        r.usage = TokenUsage{u.value("promptTokenCount", 0LL), u.value("candidatesTokenCount", 0LL)};
      }
    } else {
      const auto& content = j.at("choices").at(0).at("message").at("content");
      r.text = content.is_string() ? content.get<std::string>() : std::string();
      if (j.contains("usage")) {
        const auto& u = j["usage"];
        r.usage = TokenUsage{u.value("prompt_tokens", 0LL), u.value("completion_tokens", 0LL)};
      }
    }
  } catch (const json::exception&) {
    throw ProviderError(200, body);
  }
  return r;
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

struct QueryContext {
  ResponseCache* cache = nullptr;
  Transport transport;
  std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  };
  std::function<std::optional<std::string>(const std::string&)> getenv = [](const std::string& name) {
    const char* v = std::getenv(name.c_str());
    return v ? std::optional<std::string>(v) : std::nullopt;
  };
  std::chrono::milliseconds base_backoff{1000};
};

inline bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

/// Cached text for (model, prompt), or a fresh provider call that is then
/// cached. Retries 408/429/5xx and network failures with doubling delays.
inline std::string query_model(const ModelSpec& spec, const std::string& prompt, QueryContext& ctx) {
  const std::string key = cache_key(spec.model_name, prompt);
  if (ctx.cache) {
    if (auto hit = ctx.cache->get(key)) return hit->raw_text;
  }
  std::string credential;
  if (!spec.auth_env_var.empty()) {
    auto v = ctx.getenv(spec.auth_env_var);
    if (!v || v->empty()) throw AuthMissing("environment variable " + spec.auth_env_var + " is not set");
    credential = *v;
  }
  if (!ctx.transport) throw NetworkError("no transport configured");
  const HttpRequest req = build_provider_request(spec, prompt, credential);

  std::optional<HttpResponse> last;
  std::string last_network_error;
  for (int attempt = 0; attempt <= spec.max_retries; ++attempt) {
    if (attempt > 0) ctx.sleep(ctx.base_backoff * (1LL << (attempt - 1)));
    try {
      HttpResponse resp = ctx.transport(req);
      if (resp.status >= 200 && resp.status < 300) {
        ProviderReply reply = parse_provider_reply(spec, resp.body);
        if (ctx.cache) {
          CachedResponse c{key, spec.model_name, reply.text, utc_timestamp(), reply.usage, json::object()};
          c.sampling["temperature"] = spec.temperature ? json(*spec.temperature) : json(nullptr);
          c.sampling["provider_id"] = spec.provider_id;
          ctx.cache->put(c);
        }
        return reply.text;
      }
      last = resp;
      if (!retryable_status(resp.status)) break;
    } catch (const NetworkError& e) {
      last.reset();
      last_network_error = e.what();
    }
  }
  if (last) throw ProviderError(last->status, last->body);
  throw NetworkError("request failed after " + std::to_string(spec.max_retries + 1) +
                     " attempts: " + last_network_error);
}

} // namespace matchup
