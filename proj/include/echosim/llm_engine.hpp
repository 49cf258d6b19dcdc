#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>

#include "echosim/engine.hpp"
#include "echosim/llm_client.hpp"
#include "echosim/protocol.hpp"

namespace echosim {

struct LlmEngineOptions {
  double decision_temperature = 0.0;   // influence / compatibility calls
  double generation_temperature = 0.7; // post generation
  int max_tokens = 512;
  std::uint64_t seed_slot = 0;         // folded into cache keys per run
  // Reuse compatibility results for opinion pairs that agree to 1e-2.
  // Worth it against a paid endpoint; keep off when exact per-call values
  // matter (the mock equivalence harness does).
  bool compat_cache = false;
};

// An in-process stand-in for a chat-completion endpoint. It reads the
// stance numbers embedded in the rendered prompt, runs the same closed-form
// arithmetic as the equation engine, and answers in the structured text
// protocol — so the full render → complete → parse path is exercised while
// staying bit-identical to the equation engine.
class MockTransport : public Transport {
 public:
  explicit MockTransport(EquationEngineParams params);
  TransportResult post(const std::string& request_body) override;
  int calls() const { return calls_; }

 private:
  EquationEngineParams params_;
  int calls_ = 0;
};

// Engine that delegates every decision to a completion endpoint through the
// text protocol. A parse failure falls back to the equation engine's value
// for that single call and bumps fallback_count(); transport failures
// propagate and abort the run.
class LlmEngine : public OpinionEngine {
 public:
  LlmEngine(std::string name, std::shared_ptr<LlmClient> client, std::string model,
            EquationEngineParams fallback_params, LlmEngineOptions options = {});

  std::string_view name() const override { return name_; }
  InfluenceValue influence(const AgentView& neighbor, const AgentView& self) override;
  CompatibilityScore compatibility(const AgentView& self, const AgentView& other) override;
  Post generate_post(const AgentView& self, const Screen& screen, int step, Rng& rng) override;
  int fallback_count() const override { return fallbacks_; }

 private:
  EngineResponse ask(const std::string& prompt, ResponseKind kind, double temperature);

  std::string name_;
  std::shared_ptr<LlmClient> client_;
  std::string model_;
  EquationEngine fallback_;
  LlmEngineOptions options_;
  int fallbacks_ = 0;
  std::unordered_map<std::uint64_t, double> compat_cache_;
};

// An engine plus the client it talks through (null for the equation engine).
struct EngineSetup {
  std::unique_ptr<OpinionEngine> engine;
  std::shared_ptr<LlmClient> client;
};

// Builds the engine named by `kind`. The mock engine wires a MockTransport
// behind a regular client; the llm engine needs endpoint.url (and uses
// endpoint.model, falling back to "default" when unset).
EngineSetup make_engine(EngineKind kind, const EquationEngineParams& params,
                        const LlmEngineOptions& options = {},
                        const LlmEndpointConfig& endpoint = {},
                        const LlmClientOptions& client_options = {});

EngineKind engine_kind_from_string(const std::string& s);  // throws ConfigError
std::string to_string(EngineKind kind);

}  // namespace echosim
