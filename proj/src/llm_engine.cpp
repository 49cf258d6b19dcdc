#include "echosim/llm_engine.hpp"

#include <cmath>
#include <cstdlib>
#include <vector>

#include <nlohmann/json.hpp>

#include "echosim/error.hpp"

namespace echosim {

namespace {

constexpr const char* kSelfStanceMarker = "| current stance ";
constexpr const char* kScreenStanceMarker = "| stance ";

// All numbers following `marker`, in order of appearance.
std::vector<double> stances_after_marker(const std::string& prompt, const std::string& marker) {
  std::vector<double> out;
  std::size_t at = prompt.find(marker);
  while (at != std::string::npos) {
    out.push_back(std::strtod(prompt.c_str() + at + marker.size(), nullptr));
    at = prompt.find(marker, at + marker.size());
  }
  return out;
}

TransportResult ok_body(const std::string& content) {
  const nlohmann::json body{
      {"choices",
       nlohmann::json::array({nlohmann::json{
           {"message", nlohmann::json{{"role", "assistant"}, {"content", content}}}}})},
  };
  return {200, body.dump(), ""};
}

TransportResult bad_request(const std::string& why) {
  return {400, "mock transport cannot answer: " + why, ""};
}

}  // namespace

MockTransport::MockTransport(EquationEngineParams params) : params_(params) {
  params_.validate();
}

TransportResult MockTransport::post(const std::string& request_body) {
  ++calls_;
  const nlohmann::json request = nlohmann::json::parse(request_body, nullptr, false);
  if (request.is_discarded() || !request.contains("messages") ||
      !request["messages"].is_array() || request["messages"].empty()) {
    return bad_request("malformed request body");
  }
  const auto& content = request["messages"][0]["content"];
  if (!content.is_string()) return bad_request("missing prompt content");
  const std::string prompt = content.get<std::string>();

  // The output schema sits at the end of every prompt; the latest schema
  // marker identifies the task.
  const std::size_t influence_at = prompt.rfind("INFLUENCE: <");
  const std::size_t compat_at = prompt.rfind("COMPATIBILITY: <");
  const std::size_t post_at = prompt.rfind("POST: <");
  const std::size_t none = std::string::npos;

  const std::vector<double> current = stances_after_marker(prompt, kSelfStanceMarker);
  if (current.empty()) return bad_request("no stance header found");
  const double self_stance = current[0];

  auto later = [](std::size_t a, std::size_t b) { return a != none && (b == none || a > b); };

  if (later(post_at, influence_at) && later(post_at, compat_at)) {
    const std::vector<double> screen = stances_after_marker(prompt, kScreenStanceMarker);
    const OpinionValue updated =
        opinion_after_posts(params_, OpinionValue(self_stance), screen);
    const std::string value = format_micro(updated.value());
    // The post line mirrors the closed-form engine's synthesized text so a
    // mock run is indistinguishable from an equation run, event for event.
    return ok_body(
        "Reading the screen and weighing each post against my own position.\n"
        "POST: stance update " + value + "\n"
        "STANCE: " + value);
  }
  if (current.size() < 2) return bad_request("pair task needs two stance headers");
  if (later(influence_at, compat_at)) {
    const double f = equation_influence(params_, current[1], current[0]);
    return ok_body(
        "Comparing the two stances and the confidence bound.\n"
        "INFLUENCE: " + format_micro(f));
  }
  if (compat_at != none) {
    const double g = equation_compatibility(current[0], current[1]);
    return ok_body(
        "Comparing how closely the two stances track each other.\n"
        "COMPATIBILITY: " + format_micro(g));
  }
  return bad_request("no output schema recognized");
}

LlmEngine::LlmEngine(std::string name, std::shared_ptr<LlmClient> client, std::string model,
                     EquationEngineParams fallback_params, LlmEngineOptions options)
    : name_(std::move(name)),
      client_(std::move(client)),
      model_(std::move(model)),
      fallback_(fallback_params),
      options_(options) {}

EngineResponse LlmEngine::ask(const std::string& prompt, ResponseKind kind, double temperature) {
  LlmRequest request{model_, prompt, temperature, options_.max_tokens, options_.seed_slot};
  const std::string body = client_->complete(request);
  const std::optional<std::string> content = extract_content(body);
  if (!content) {
    EngineResponse r;
    r.raw = body;
    r.kind = kind;
    r.status = ParseStatus::Failed;
    return r;
  }
  return parse_response(*content, kind);
}

InfluenceValue LlmEngine::influence(const AgentView& neighbor, const AgentView& self) {
  const EngineResponse r = ask(render_influence_prompt(self, neighbor),
                               ResponseKind::Influence, options_.decision_temperature);
  if (!r.has_value()) {
    ++fallbacks_;
    return fallback_.influence(neighbor, self);
  }
  return InfluenceValue(r.value);
}

CompatibilityScore LlmEngine::compatibility(const AgentView& self, const AgentView& other) {
  std::uint64_t bucket = 0;
  if (options_.compat_cache) {
    const auto cell = [](double v) {
      return static_cast<std::uint64_t>(static_cast<std::uint32_t>(
          std::lround((v + 1.0) * 100.0)));
    };
    bucket = (cell(self.opinion.value()) << 32) | cell(other.opinion.value());
    if (const auto it = compat_cache_.find(bucket); it != compat_cache_.end()) {
      return CompatibilityScore(it->second);
    }
  }
  const EngineResponse r = ask(render_compatibility_prompt(self, other),
                               ResponseKind::Compatibility, options_.decision_temperature);
  double value;
  if (!r.has_value()) {
    ++fallbacks_;
    value = fallback_.compatibility(self, other).value();
  } else {
    value = CompatibilityScore(r.value).value();
  }
  if (options_.compat_cache) compat_cache_[bucket] = value;
  return CompatibilityScore(value);
}

Post LlmEngine::generate_post(const AgentView& self, const Screen& screen, int step, Rng& rng) {
  const EngineResponse r = ask(render_generate_prompt(self, screen),
                               ResponseKind::Generated, options_.generation_temperature);
  if (!r.has_value()) {
    ++fallbacks_;
    return fallback_.generate_post(self, screen, step, rng);
  }
  Post post;
  post.author = self.id;
  post.step = step;
  post.origin = PostOrigin::Sim;
  post.text = sanitize_line(r.text);
  post.stance = OpinionValue(r.value);
  return post;
}

EngineSetup make_engine(EngineKind kind, const EquationEngineParams& params,
                        const LlmEngineOptions& options, const LlmEndpointConfig& endpoint,
                        const LlmClientOptions& client_options) {
  EngineSetup setup;
  switch (kind) {
    case EngineKind::Equation:
      setup.engine = std::make_unique<EquationEngine>(params);
      return setup;
    case EngineKind::Mock: {
      setup.client = std::make_shared<LlmClient>(std::make_shared<MockTransport>(params),
                                                 client_options);
      setup.engine = std::make_unique<LlmEngine>(
          "mock", setup.client, endpoint.model.empty() ? "mock" : endpoint.model, params,
          options);
      return setup;
    }
    case EngineKind::Llm: {
      if (endpoint.url.empty()) {
        throw ConfigError("llm engine needs an endpoint url (ECHOSIM_LLM_URL or config)");
      }
      setup.client = std::make_shared<LlmClient>(std::make_shared<HttpTransport>(endpoint),
                                                 client_options);
      setup.engine = std::make_unique<LlmEngine>(
          "llm", setup.client, endpoint.model.empty() ? "default" : endpoint.model, params,
          options);
      return setup;
    }
  }
  throw ConfigError("unknown engine kind");
}

EngineKind engine_kind_from_string(const std::string& s) {
  if (s == "equation") return EngineKind::Equation;
  if (s == "mock") return EngineKind::Mock;
  if (s == "llm") return EngineKind::Llm;
  throw ConfigError("unknown engine: " + s + " (expected equation, mock, or llm)");
}

std::string to_string(EngineKind kind) {
  switch (kind) {
    case EngineKind::Equation: return "equation";
    case EngineKind::Mock: return "mock";
    case EngineKind::Llm: return "llm";
  }
  return "equation";
}

}  // namespace echosim
