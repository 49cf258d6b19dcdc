#include "echosim/llm_client.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "echosim/error.hpp"

namespace echosim {

namespace {

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a_str(std::uint64_t h, const std::string& s) {
  h = fnv1a(h, s.data(), s.size());
  return fnv1a(h, "\x1f", 1);  // field separator
}

std::string excerpt(const std::string& body) {
  constexpr std::size_t kMax = 200;
  if (body.size() <= kMax) return body;
  return body.substr(0, kMax) + "...";
}

}  // namespace

LlmEndpointConfig llm_endpoint_from_env() {
  return {env_or_empty("ECHOSIM_LLM_URL"), env_or_empty("ECHOSIM_LLM_KEY"),
          env_or_empty("ECHOSIM_LLM_MODEL")};
}

HttpTransport::HttpTransport(LlmEndpointConfig endpoint) : endpoint_(std::move(endpoint)) {
  const std::string& url = endpoint_.url;
  const std::size_t scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("endpoint url missing scheme: " + url);
  const std::size_t slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) {
    base_ = url;
    path_ = "/";
  } else {
    base_ = url.substr(0, slash);
    path_ = url.substr(slash);
  }
}

TransportResult HttpTransport::post(const std::string& request_body) {
  httplib::Client client(base_);
  client.set_connection_timeout(10, 0);
  client.set_read_timeout(120, 0);
  httplib::Headers headers;
  if (!endpoint_.key.empty()) {
    headers.emplace("Authorization", "Bearer " + endpoint_.key);
  }
  const httplib::Result res = client.Post(path_, headers, request_body, "application/json");
  if (!res) {
    return {0, "transport error: " + httplib::to_string(res.error()), ""};
  }
  return {res->status, res->body, res->get_header_value("Retry-After")};
}

std::string LlmRequest::cache_key() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = fnv1a_str(h, model);
  h = fnv1a_str(h, rendered_prompt);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g|%d|%llu", temperature, max_tokens,
                static_cast<unsigned long long>(seed_slot));
  h = fnv1a(h, buf, std::char_traits<char>::length(buf));
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string chat_request_body(const LlmRequest& request) {
  nlohmann::json body{
      {"model", request.model},
      {"messages", nlohmann::json::array({nlohmann::json{
                       {"role", "user"}, {"content", request.rendered_prompt}}})},
      {"temperature", request.temperature},
      {"max_tokens", request.max_tokens},
  };
  return body.dump();
}

std::optional<std::string> extract_content(const std::string& response_body) {
  const nlohmann::json parsed = nlohmann::json::parse(response_body, nullptr, false);
  if (parsed.is_discarded()) return std::nullopt;
  const auto choices = parsed.find("choices");
  if (choices == parsed.end() || !choices->is_array() || choices->empty()) return std::nullopt;
  const auto& first = (*choices)[0];
  if (!first.contains("message")) return std::nullopt;
  const auto& message = first["message"];
  if (!message.contains("content") || !message["content"].is_string()) return std::nullopt;
  return message["content"].get<std::string>();
}

LlmClient::LlmClient(std::shared_ptr<Transport> transport, LlmClientOptions options)
    : transport_(std::move(transport)), options_(std::move(options)) {
  if (!options_.cache_path.empty()) load_cache_file();
}

void LlmClient::load_cache_file() {
  std::ifstream in(options_.cache_path);
  if (!in) return;  // nothing cached yet
  std::string line;
  while (std::getline(in, line)) {
    // A torn final line from an interrupted append is skipped, not fatal.
    const nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.contains("cache_key") || !record.contains("raw")) {
      continue;
    }
    cache_[record["cache_key"].get<std::string>()] = record["raw"].get<std::string>();
  }
}

void LlmClient::store(const std::string& key, const std::string& body) {
  cache_[key] = body;
  if (options_.cache_path.empty()) return;
  const nlohmann::json record{
      {"cache_key", key},
      {"ts", static_cast<std::int64_t>(std::time(nullptr))},
      {"raw", body},
  };
  std::ofstream out(options_.cache_path, std::ios::app);
  if (!out) throw IoError("cannot append to cache file: " + options_.cache_path);
  out << record.dump() << '\n';
}

std::string LlmClient::complete(const LlmRequest& request) {
  const std::string key = request.cache_key();
  std::lock_guard<std::mutex> lock(mutex_);
  if (const auto it = cache_.find(key); it != cache_.end()) return it->second;

  const std::string body = chat_request_body(request);
  std::string last_failure;
  for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
    ++network_calls_;
    const TransportResult res = transport_->post(body);
    if (res.status >= 200 && res.status < 300) {
      store(key, res.body);
      return res.body;
    }
    const bool retryable = res.status == 0 || res.status == 429 || res.status >= 500;
    if (!retryable) throw ApiError(res.status, excerpt(res.body));
    last_failure = res.status == 0 ? res.body
                                   : "status " + std::to_string(res.status) + ": " +
                                         excerpt(res.body);
    if (attempt < options_.max_attempts) {
      long delay_ms = options_.backoff_base_ms << (attempt - 1);
      if (!res.retry_after.empty()) {
        const long advised = std::strtol(res.retry_after.c_str(), nullptr, 10);
        if (advised > 0) delay_ms = advised * 1000L;
      }
      if (delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
    }
  }
  throw TransportError("request failed after " + std::to_string(options_.max_attempts) +
                       " attempts; last: " + last_failure);
}

}  // namespace echosim
