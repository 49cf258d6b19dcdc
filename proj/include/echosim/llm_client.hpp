#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

namespace echosim {

// One HTTP exchange as the client sees it. status 0 means the request never
// produced an HTTP response (connect failure, timeout, ...), with the error
// description in body.
struct TransportResult {
  int status = 0;
  std::string body;
  std::string retry_after;  // Retry-After header value, seconds, if present
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual TransportResult post(const std::string& request_body) = 0;
};

// Endpoint settings, usually from ECHOSIM_LLM_URL / ECHOSIM_LLM_KEY /
// ECHOSIM_LLM_MODEL; a config file can override each.
struct LlmEndpointConfig {
  std::string url;    // e.g. http://host:8080/v1/chat/completions
  std::string key;    // sent as a bearer token when non-empty
  std::string model;
};

LlmEndpointConfig llm_endpoint_from_env();

// POSTs chat-completion bodies to a fixed URL.
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(LlmEndpointConfig endpoint);
  TransportResult post(const std::string& request_body) override;

 private:
  LlmEndpointConfig endpoint_;
  std::string base_;  // scheme://host[:port]
  std::string path_;
};

// One completion call. The cache key folds in every field that can change
// the answer, plus a seed slot so repeated simulation runs of the same
// prompt stay independently cached.
struct LlmRequest {
  std::string model;
  std::string rendered_prompt;
  double temperature = 0.0;
  int max_tokens = 512;
  std::uint64_t seed_slot = 0;

  std::string cache_key() const;  // 16 hex digits, FNV-1a over the fields
};

// The de-facto chat-completion JSON shapes.
std::string chat_request_body(const LlmRequest& request);
std::optional<std::string> extract_content(const std::string& response_body);

struct LlmClientOptions {
  std::string cache_path;    // empty → in-memory cache only
  int max_attempts = 3;
  int backoff_base_ms = 1000;  // doubled per retry; tests set 0
};

// Completion with bounded retries and an append-only response cache.
// Retried: network failures, 5xx, and 429 (honoring Retry-After); retry
// exhaustion throws TransportError. Any other non-2xx status throws
// ApiError immediately. Cache hits never touch the transport.
class LlmClient {
 public:
  LlmClient(std::shared_ptr<Transport> transport, LlmClientOptions options = {});

  // Returns the raw response body, verbatim.
  std::string complete(const LlmRequest& request);

  int network_calls() const { return network_calls_; }
  std::size_t cache_size() const { return cache_.size(); }

 private:
  void load_cache_file();
  void store(const std::string& key, const std::string& body);

  std::shared_ptr<Transport> transport_;
  LlmClientOptions options_;
  std::unordered_map<std::string, std::string> cache_;
  std::mutex mutex_;
  int network_calls_ = 0;
};

}  // namespace echosim
