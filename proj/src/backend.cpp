#include "d2d/backend.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace d2d {

using json = nlohmann::json;

std::string_view to_string(Role r) {
  switch (r) {
    case Role::SYSTEM: return "system";
    case Role::USER: return "user";
    case Role::ASSISTANT: return "assistant";
  }
  return "user";
}

void ChatRequest::validate() const {
  if (model.empty()) throw Error(ErrorCode::INVALID_ARGUMENT, "request model is empty");
  if (messages.empty()) throw Error(ErrorCode::INVALID_ARGUMENT, "request has no messages");
  for (const auto& m : messages) {
    if (m.role == Role::USER && m.content.empty()) {
      throw Error(ErrorCode::INVALID_ARGUMENT, "user message content is empty");
    }
  }
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw Error(ErrorCode::INVALID_ARGUMENT, "temperature outside [0,2]");
  }
}

std::string CacheKey::hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (auto b : digest) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

CacheKey CacheKey::from_hex(std::string_view hex) {
  if (hex.size() != 64) throw Error(ErrorCode::INVALID_ARGUMENT, "cache key must be 64 hex digits");
  CacheKey k;
  for (size_t i = 0; i < 32; ++i) {
    unsigned v = 0;
    auto [p, ec] = std::from_chars(hex.data() + 2 * i, hex.data() + 2 * i + 2, v, 16);
    if (ec != std::errc{} || p != hex.data() + 2 * i + 2) {
      throw Error(ErrorCode::INVALID_ARGUMENT, "bad hex in cache key");
    }
    k.digest[i] = static_cast<std::uint8_t>(v);
  }
  return k;
}

size_t CacheKeyHash::operator()(const CacheKey& k) const noexcept {
  size_t h = 0;
  for (size_t i = 0; i < sizeof(size_t); ++i) h = (h << 8) | k.digest[i];
  return h;
}

std::string canonical_form(const ChatRequest& request) {
  auto field = [](std::string& out, std::string_view tag, std::string_view value) {
    out += tag;
    out += ':';
    out += std::to_string(value.size());
    out += ':';
    out += value;
    out += '\n';
  };
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, request.temperature);
  std::string out = "chat-request/v1\n";
  field(out, "model", request.model);
  field(out, "temperature", std::string_view(buf, static_cast<size_t>(end - buf)));
  field(out, "messages", std::to_string(request.messages.size()));
  for (const auto& m : request.messages) {
    field(out, "role", to_string(m.role));
    field(out, "content", m.content);
  }
  return out;
}

CacheKey cache_key(const ChatRequest& request) {
  const auto canon = canonical_form(request);
  CacheKey k;
  unsigned int len = 0;
  if (EVP_Digest(canon.data(), canon.size(), k.digest.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != k.digest.size()) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  return k;
}

// ---------------- HttpBackend ----------------

HttpBackend::HttpBackend(HttpBackendOptions options)
    : HttpBackend(options, [&] {
        const char* key = options.api_key_env.empty() ? nullptr : std::getenv(options.api_key_env.c_str());
        return key ? std::string(key) : std::string();
      }()) {}

HttpBackend::HttpBackend(HttpBackendOptions options, std::string api_key)
    : options_(std::move(options)), api_key_(std::move(api_key)) {
  auto url = options_.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::INVALID_ARGUMENT, "base URL needs a scheme: " + options_.base_url);
  }
  const auto path_begin = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_begin);
  path_prefix_ = path_begin == std::string::npos ? "" : url.substr(path_begin);
  if (options_.max_attempts < 1) throw Error(ErrorCode::INVALID_ARGUMENT, "max_attempts must be >= 1");
}

std::string HttpBackend::request_body(const ChatRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  json body = {{"model", request.model}, {"messages", messages}, {"temperature", request.temperature}};
  return body.dump();
}

std::string HttpBackend::parse_response(const std::string& body) {
  try {
    const auto j = json::parse(body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw std::runtime_error("content is not a string");
    return content.get<std::string>();
  } catch (const std::exception& e) {
    throw Error(ErrorCode::BACKEND_UNAVAILABLE, std::string("malformed completion body: ") + e.what());
  }
}

std::string HttpBackend::complete(const ChatRequest& request) {
  request.validate();
  const auto body = request_body(request);
  const auto path = path_prefix_ + options_.path;

  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  auto backoff = options_.initial_backoff;
  std::string last_error;
  for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(options_.connect_timeout);
    client.set_read_timeout(options_.read_timeout);
    auto res = client.Post(path, headers, body, "application/json");
    if (res) {
      if (res->status >= 200 && res->status < 300) return parse_response(res->body);
      if (res->status == 401 || res->status == 403) {
        throw Error(ErrorCode::AUTH_ERROR, "endpoint rejected credentials (HTTP " +
                                               std::to_string(res->status) + ")");
      }
      last_error = "HTTP " + std::to_string(res->status);
      const bool transient = res->status == 429 || res->status == 408 || res->status >= 500;
      if (!transient) throw Error(ErrorCode::BACKEND_UNAVAILABLE, last_error + ": " + res->body);
    } else {
      last_error = httplib::to_string(res.error());
    }
    if (attempt == options_.max_attempts) break;
    std::this_thread::sleep_for(backoff);
    backoff = std::min(options_.max_backoff,
                       std::chrono::milliseconds(static_cast<long long>(
                           static_cast<double>(backoff.count()) * options_.backoff_multiplier)));
  }
  throw Error(ErrorCode::BACKEND_UNAVAILABLE, "gave up after " + std::to_string(options_.max_attempts) +
                                                  " attempts, last error: " + last_error);
}

// ---------------- ScriptedBackend ----------------

void ScriptedBackend::on_key(const CacheKey& key, std::string response) {
  std::lock_guard lock(mu_);
  by_key_[key] = std::move(response);
}

void ScriptedBackend::on_contains(std::string needle, std::vector<std::string> responses,
                                  std::optional<std::string> model) {
  if (responses.empty()) throw Error(ErrorCode::INVALID_ARGUMENT, "scripted rule needs a response");
  std::lock_guard lock(mu_);
  rules_.push_back(Rule{std::move(needle), std::move(model), std::move(responses), 0});
}

void ScriptedBackend::set_fallback(Fallback fallback) {
  std::lock_guard lock(mu_);
  fallback_ = std::move(fallback);
}

std::string ScriptedBackend::complete(const ChatRequest& request) {
  request.validate();
  const auto key = cache_key(request);
  Fallback fallback;
  {
    std::lock_guard lock(mu_);
    log_.push_back(request);
    if (auto it = by_key_.find(key); it != by_key_.end()) return it->second;
    for (auto& rule : rules_) {
      if (rule.model && *rule.model != request.model) continue;
      // Retries append to the conversation, so any prompt message may carry the needle.
      const bool hit = std::any_of(request.messages.begin(), request.messages.end(), [&](const ChatMessage& m) {
        return m.role != Role::ASSISTANT && m.content.find(rule.needle) != std::string::npos;
      });
      if (!hit) continue;
      const auto& r = rule.responses[std::min(rule.next, rule.responses.size() - 1)];
      ++rule.next;
      return r;
    }
    fallback = fallback_;
  }
  if (fallback) {
    if (auto r = fallback(request)) return *r;
  }
  throw Error(ErrorCode::NO_SCRIPT_MATCH, "no scripted response for request " + key.hex());
}

std::vector<ChatRequest> ScriptedBackend::log() const {
  std::lock_guard lock(mu_);
  return log_;
}

size_t ScriptedBackend::calls() const {
  std::lock_guard lock(mu_);
  return log_.size();
}

void ScriptedBackend::clear_log() {
  std::lock_guard lock(mu_);
  log_.clear();
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_fixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IO_ERROR, "cannot open fixture " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SCHEMA_ERROR, path + ": " + e.what());
  }
  auto backend = std::make_unique<ScriptedBackend>();
  try {
    for (const auto& rule : j.value("rules", json::array())) {
      std::vector<std::string> responses;
      if (rule.contains("responses")) {
        responses = rule.at("responses").get<std::vector<std::string>>();
      } else {
        responses.push_back(rule.at("response").get<std::string>());
      }
      std::optional<std::string> model;
      if (rule.contains("model")) model = rule.at("model").get<std::string>();
      backend->on_contains(rule.at("contains").get<std::string>(), std::move(responses), std::move(model));
    }
    if (j.contains("default")) {
      backend->set_fallback([d = j.at("default").get<std::string>()](const ChatRequest&) {
        return std::optional<std::string>(d);
      });
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SCHEMA_ERROR, path + ": " + e.what());
  }
  return backend;
}

// ---------------- CachedBackend ----------------

CachedBackend::CachedBackend(Backend* inner, std::optional<std::string> path)
    : inner_(inner), path_(std::move(path)) {
  if (path_) load_file();
}

void CachedBackend::load_file() {
  std::ifstream in(*path_);
  if (!in) return;  // created on first insert
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      entries_.try_emplace(CacheKey::from_hex(j.at("key").get<std::string>()),
                           j.at("response").get<std::string>());
    } catch (const std::exception& e) {
      // A torn final line from an interrupted writer is tolerated.
      if (in.peek() == EOF) break;
      throw Error(ErrorCode::SCHEMA_ERROR,
                  *path_ + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::optional<std::string> CachedBackend::lookup(const CacheKey& key) const {
  std::shared_lock lock(mu_);
  if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  return std::nullopt;
}

std::string CachedBackend::insert_if_absent(const CacheKey& key, const std::string& value) {
  {
    std::unique_lock lock(mu_);
    auto [it, inserted] = entries_.try_emplace(key, value);
    if (!inserted) return it->second;
  }
  if (path_) {
    std::lock_guard lock(file_mu_);
    std::ofstream out(*path_, std::ios::app | std::ios::binary);
    if (!out) throw Error(ErrorCode::IO_ERROR, "cannot append to cache " + *path_);
    out << json{{"key", key.hex()}, {"response", value}}.dump() << '\n';
    out.flush();
  }
  return value;
}

size_t CachedBackend::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

std::string CachedBackend::complete(const ChatRequest& request) {
  request.validate();
  const auto key = cache_key(request);
  if (auto hit = lookup(key)) {
    hits_.fetch_add(1);
    return *hit;
  }
  misses_.fetch_add(1);
  if (!inner_) throw Error(ErrorCode::BACKEND_UNAVAILABLE, "replay-only cache has no entry " + key.hex());
  return insert_if_absent(key, inner_->complete(request));
}

}  // namespace d2d
