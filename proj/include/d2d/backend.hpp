#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "d2d/core.hpp"

namespace d2d {

enum class Role { SYSTEM, USER, ASSISTANT };

std::string_view to_string(Role r);  // "system" | "user" | "assistant"

struct ChatMessage {
  Role role = Role::USER;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;

  /// Throws INVALID_ARGUMENT for an empty model, no messages, an empty user
  /// message or a temperature outside [0,2].
  void validate() const;

  bool operator==(const ChatRequest&) const = default;
};

struct CacheKey {
  std::array<std::uint8_t, 32> digest{};

  std::string hex() const;
  static CacheKey from_hex(std::string_view hex);

  bool operator==(const CacheKey&) const = default;
};

struct CacheKeyHash {
  size_t operator()(const CacheKey& k) const noexcept;
};

/// Canonical byte string hashed into a CacheKey. Fields appear in a fixed order
/// with length prefixes; temperature uses the shortest round-trip decimal form.
std::string canonical_form(const ChatRequest& request);

/// SHA-256 of canonical_form(request).
CacheKey cache_key(const ChatRequest& request);

/// A chat-completion gateway. Implementations must be callable concurrently.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
};

struct HttpBackendOptions {
  std::string base_url = "https://api.openai.com/v1";
  std::string path = "/chat/completions";
  std::string api_key_env = "OPENAI_API_KEY";
  int max_attempts = 5;
  std::chrono::milliseconds initial_backoff{1000};
  double backoff_multiplier = 2.0;
  std::chrono::milliseconds max_backoff{30000};
  std::chrono::seconds connect_timeout{10};
  std::chrono::seconds read_timeout{120};
};

/// OpenAI-compatible chat-completions client. Rate limits (429), server errors
/// (5xx) and transport failures are retried with exponential backoff, at most
/// max_attempts requests in total; 401/403 fail immediately with AUTH_ERROR.
class HttpBackend : public Backend {
 public:
  /// Reads the API key from options.api_key_env. A missing key is not an error
  /// here; local endpoints often need none.
  explicit HttpBackend(HttpBackendOptions options);
  HttpBackend(HttpBackendOptions options, std::string api_key);

  std::string complete(const ChatRequest& request) override;

  /// JSON body sent on the wire.
  static std::string request_body(const ChatRequest& request);
  /// Extracts choices[0].message.content; throws BACKEND_UNAVAILABLE on a malformed body.
  static std::string parse_response(const std::string& body);

 private:
  HttpBackendOptions options_;
  std::string api_key_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

/// Deterministic responder for tests and offline fixtures.
///
/// Lookup order: exact CacheKey entries, then substring rules in registration
/// order (optionally restricted to a model), then the fallback function. Rules
/// match a needle in any system or user message, so a re-query that extends the
/// conversation still reaches the rule of its original prompt. A rule
/// holding several responses hands them out in sequence and repeats the last
/// one once exhausted.
class ScriptedBackend : public Backend {
 public:
  using Fallback = std::function<std::optional<std::string>(const ChatRequest&)>;

  void on_key(const CacheKey& key, std::string response);
  void on_request(const ChatRequest& request, std::string response) {
    on_key(cache_key(request), std::move(response));
  }
  void on_contains(std::string needle, std::vector<std::string> responses,
                   std::optional<std::string> model = std::nullopt);
  void on_contains(std::string needle, std::string response) {
    on_contains(std::move(needle), std::vector<std::string>{std::move(response)});
  }
  void set_fallback(Fallback fallback);

  std::string complete(const ChatRequest& request) override;

  /// Every request seen, in arrival order.
  std::vector<ChatRequest> log() const;
  size_t calls() const;
  void clear_log();

  /// Loads rules from a JSON fixture:
  ///   {"rules": [{"contains": "...", "model": "...", "responses": ["..."]}],
  ///    "default": "..."}
  static std::unique_ptr<ScriptedBackend> from_fixture(const std::string& path);

 private:
  struct Rule {
    std::string needle;
    std::optional<std::string> model;
    std::vector<std::string> responses;
    size_t next = 0;
  };

  mutable std::mutex mu_;
  std::unordered_map<CacheKey, std::string, CacheKeyHash> by_key_;
  std::vector<Rule> rules_;
  Fallback fallback_;
  std::vector<ChatRequest> log_;
};

/// Counts calls reaching the wrapped backend.
class CountingBackend : public Backend {
 public:
  explicit CountingBackend(Backend& inner) : inner_(inner) {}
  std::string complete(const ChatRequest& request) override {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return inner_.complete(request);
  }
  long calls() const { return calls_.load(); }

 private:
  Backend& inner_;
  std::atomic<long> calls_{0};
};

/// Content-addressed record/replay wrapper. Responses are kept in memory and
/// appended to a JSON-lines file ({"key": hex, "response": text}) when a path is
/// given. With no inner backend the cache is replay-only and a miss raises
/// BACKEND_UNAVAILABLE.
class CachedBackend : public Backend {
 public:
  CachedBackend(Backend* inner, std::optional<std::string> path);

  std::string complete(const ChatRequest& request) override;

  std::optional<std::string> lookup(const CacheKey& key) const;
  /// Stores value unless the key is present; returns the stored value either way.
  std::string insert_if_absent(const CacheKey& key, const std::string& value);
  size_t size() const;
  long hits() const { return hits_.load(); }
  long misses() const { return misses_.load(); }

 private:
  void load_file();

  Backend* inner_;
  std::optional<std::string> path_;
  mutable std::shared_mutex mu_;
  std::mutex file_mu_;
  std::unordered_map<CacheKey, std::string, CacheKeyHash> entries_;
  std::atomic<long> hits_{0};
  std::atomic<long> misses_{0};
};

}  // namespace d2d
