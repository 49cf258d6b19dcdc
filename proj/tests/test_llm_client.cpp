#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <fstream>
#include <httplib.h>
#include <memory>
#include <nlohmann/json.hpp>
#include <string>
#include <thread>
#include <vector>

#include "echosim/error.hpp"
#include "echosim/llm_client.hpp"
#include "helpers.hpp"

using namespace echosim;
using nlohmann::json;

namespace {

// A transport that replays a scripted list of results.
class ScriptedTransport : public Transport {
 public:
  explicit ScriptedTransport(std::vector<TransportResult> script)
      : script_(std::move(script)) {}

  TransportResult post(const std::string& request_body) override {
    last_request = request_body;
    ++calls;
    if (script_.empty()) return {200, "{}", ""};
    TransportResult r = script_.front();
    if (script_.size() > 1) script_.erase(script_.begin());
    return r;
  }

  int calls = 0;
  std::string last_request;

 private:
  std::vector<TransportResult> script_;
};

LlmRequest request_fixture() {
  LlmRequest r;
  r.model = "test-model";
  r.rendered_prompt = "What is the stance?";
  r.temperature = 0.0;
  r.max_tokens = 64;
  r.seed_slot = 1;
  return r;
}

LlmClientOptions fast_options(std::string cache_path = "") {
  LlmClientOptions o;
  o.cache_path = std::move(cache_path);
  o.backoff_base_ms = 0;
  return o;
}

std::string content_body(const std::string& content) {
  return json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}
      .dump();
}

// Loopback HTTP server running a handler on a background thread.
struct LocalServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;

  explicit LocalServer(httplib::Server::Handler handler) {
    server.Post("/v1/chat/completions", std::move(handler));
    port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~LocalServer() {
    server.stop();
    thread.join();
  }
  LlmEndpointConfig endpoint() const {
    return {"http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions", "", "m"};
  }
};

}  // namespace

TEST_CASE("cache keys are 16 hex digits and cover every request field") {
  const LlmRequest base = request_fixture();
  const std::string key = base.cache_key();
  CHECK(key.size() == 16);
  CHECK(key.find_first_not_of("0123456789abcdef") == std::string::npos);
  CHECK(key == request_fixture().cache_key());  // stable

  LlmRequest r = request_fixture();
  r.model = "other";
  CHECK(r.cache_key() != key);
  r = request_fixture();
  r.rendered_prompt += "!";
  CHECK(r.cache_key() != key);
  r = request_fixture();
  r.temperature = 0.7;
  CHECK(r.cache_key() != key);
  r = request_fixture();
  r.max_tokens = 65;
  CHECK(r.cache_key() != key);
  r = request_fixture();
  r.seed_slot = 2;
  CHECK(r.cache_key() != key);
}

TEST_CASE("field boundaries are part of the key, not just the bytes") {
  LlmRequest a = request_fixture();
  a.model = "ab";
  a.rendered_prompt = "c";
  LlmRequest b = request_fixture();
  b.model = "a";
  b.rendered_prompt = "bc";
  CHECK(a.cache_key() != b.cache_key());
}

TEST_CASE("the request body is standard chat-completion JSON") {
  const json j = json::parse(chat_request_body(request_fixture()));
  CHECK(j.at("model") == "test-model");
  CHECK(j.at("temperature") == 0.0);
  CHECK(j.at("max_tokens") == 64);
  REQUIRE(j.at("messages").size() == 1);
  CHECK(j.at("messages")[0].at("role") == "user");
  CHECK(j.at("messages")[0].at("content") == "What is the stance?");
}

TEST_CASE("extract_content reads choices[0].message.content") {
  CHECK(extract_content(content_body("STANCE: 0.5")) == "STANCE: 0.5");
  CHECK_FALSE(extract_content("not json at all"));
  CHECK_FALSE(extract_content("{}"));
  CHECK_FALSE(extract_content(R"({"choices":[]})"));
  CHECK_FALSE(extract_content(R"({"choices":[{"message":{}}]})"));
  CHECK_FALSE(extract_content(R"({"choices":[{"message":{"content":42}}]})"));
}

TEST_CASE("complete returns the response body verbatim") {
  // Whatever bytes the endpoint sent come back untouched — content
  // extraction is a separate concern.
  const std::string fixed = "utterly opaque bytes, not even JSON";
  auto transport = std::make_shared<ScriptedTransport>(
      std::vector<TransportResult>{{200, fixed, ""}});
  LlmClient client(transport, fast_options());
  CHECK(client.complete(request_fixture()) == fixed);
  CHECK(transport->calls == 1);
}

TEST_CASE("a repeated request is served from cache, not the network") {
  auto transport = std::make_shared<ScriptedTransport>(
      std::vector<TransportResult>{{200, "answer-one", ""}});
  LlmClient client(transport, fast_options());
  CHECK(client.complete(request_fixture()) == "answer-one");
  CHECK(client.complete(request_fixture()) == "answer-one");
  CHECK(client.complete(request_fixture()) == "answer-one");
  CHECK(transport->calls == 1);
  CHECK(client.network_calls() == 1);
  CHECK(client.cache_size() == 1);

  LlmRequest other = request_fixture();
  other.seed_slot = 9;  // a different run slot is a different cache row
  client.complete(other);
  CHECK(transport->calls == 2);
  CHECK(client.cache_size() == 2);
}

TEST_CASE("the cache file persists completions across clients") {
  testutil::TempDir dir("llmcache");
  const std::string cache = dir.file("cache.jsonl");
  {
    auto transport = std::make_shared<ScriptedTransport>(
        std::vector<TransportResult>{{200, content_body("STANCE: 0.25"), ""}});
    LlmClient client(transport, fast_options(cache));
    client.complete(request_fixture());
    CHECK(transport->calls == 1);
  }
  {
    auto transport = std::make_shared<ScriptedTransport>(std::vector<TransportResult>{});
    LlmClient client(transport, fast_options(cache));
    CHECK(client.cache_size() == 1);
    CHECK(client.complete(request_fixture()) == content_body("STANCE: 0.25"));
    CHECK(transport->calls == 0);  // the wire was never touched
  }
}

TEST_CASE("a torn trailing cache line is skipped, earlier rows survive") {
  testutil::TempDir dir("llmcache_torn");
  const std::string cache = dir.file("cache.jsonl");
  {
    auto transport = std::make_shared<ScriptedTransport>(
        std::vector<TransportResult>{{200, "good-row", ""}});
    LlmClient client(transport, fast_options(cache));
    client.complete(request_fixture());
  }
  {
    std::ofstream out(cache, std::ios::app);
    out << "{\"cache_key\":\"deadbeef\",\"ts\":1,\"ra";  // torn mid-write
  }
  auto transport = std::make_shared<ScriptedTransport>(std::vector<TransportResult>{});
  LlmClient client(transport, fast_options(cache));
  CHECK(client.cache_size() == 1);
  CHECK(client.complete(request_fixture()) == "good-row");
}

TEST_CASE("server errors are retried to exhaustion, then throw") {
  auto transport = std::make_shared<ScriptedTransport>(
      std::vector<TransportResult>{{500, "boom", ""}});
  LlmClient client(transport, fast_options());
  CHECK_THROWS_AS(client.complete(request_fixture()), TransportError);
  CHECK(transport->calls == 3);  // default max_attempts
}

TEST_CASE("a retried request can still succeed on a later attempt") {
  auto transport = std::make_shared<ScriptedTransport>(std::vector<TransportResult>{
      {503, "overloaded", ""}, {429, "slow down", "0"}, {200, "finally", ""}});
  LlmClient client(transport, fast_options());
  CHECK(client.complete(request_fixture()) == "finally");
  CHECK(transport->calls == 3);
}

TEST_CASE("client-side statuses fail fast with status and excerpt") {
  const std::string long_body(300, 'x');
  auto transport = std::make_shared<ScriptedTransport>(
      std::vector<TransportResult>{{404, long_body, ""}});
  LlmClient client(transport, fast_options());
  try {
    client.complete(request_fixture());
    FAIL("should have thrown");
  } catch (const ApiError& e) {
    CHECK(e.status == 404);
    CHECK(e.body_excerpt.size() <= 203);  // 200 chars + ellipsis
    CHECK(transport->calls == 1);         // no retry on 4xx other than 429
  }
}

TEST_CASE("network failures (status 0) are retried like 5xx") {
  auto transport = std::make_shared<ScriptedTransport>(
      std::vector<TransportResult>{{0, "transport error: connection", ""}});
  LlmClient client(transport, fast_options());
  CHECK_THROWS_AS(client.complete(request_fixture()), TransportError);
  CHECK(transport->calls == 3);
}

TEST_CASE("a real loopback endpoint serves completions end to end") {
  std::atomic<int> hits{0};
  LocalServer server([&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    const json j = json::parse(req.body);
    CHECK(j.at("model") == "test-model");
    res.set_content(content_body("INFLUENCE: 0.125"), "application/json");
  });

  auto transport = std::make_shared<HttpTransport>(server.endpoint());
  LlmClient client(transport, fast_options());
  const std::string body = client.complete(request_fixture());
  CHECK(extract_content(body) == "INFLUENCE: 0.125");
  CHECK(client.complete(request_fixture()) == body);  // cached
  CHECK(hits == 1);
}

TEST_CASE("a loopback endpoint that keeps failing exhausts retries") {
  std::atomic<int> hits{0};
  LocalServer server([&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 500;
    res.set_content("no luck", "text/plain");
  });
  auto transport = std::make_shared<HttpTransport>(server.endpoint());
  LlmClient client(transport, fast_options());
  CHECK_THROWS_AS(client.complete(request_fixture()), TransportError);
  CHECK(hits == 3);
}

TEST_CASE("bearer auth is attached when a key is configured") {
  std::string seen_auth = "<none>";
  LocalServer server([&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    res.set_content("ok", "text/plain");
  });
  LlmEndpointConfig endpoint = server.endpoint();
  endpoint.key = "sk-test-123";
  auto transport = std::make_shared<HttpTransport>(endpoint);
  LlmClient client(transport, fast_options());
  client.complete(request_fixture());
  CHECK(seen_auth == "Bearer sk-test-123");
}

TEST_CASE("an unreachable host is a transport failure, not a crash") {
  // Nothing listens on the discard port; every attempt reports status 0.
  auto transport = std::make_shared<HttpTransport>(
      LlmEndpointConfig{"http://127.0.0.1:9/v1/chat/completions", "", "m"});
  LlmClient client(transport, fast_options());
  CHECK_THROWS_AS(client.complete(request_fixture()), TransportError);
}

TEST_CASE("endpoint urls must carry a scheme") {
  CHECK_THROWS_AS(HttpTransport(LlmEndpointConfig{"localhost:8080/x", "", ""}), ConfigError);
}
