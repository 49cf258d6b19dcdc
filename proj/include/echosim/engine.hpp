#pragma once

#include <span>
#include <string_view>

#include "echosim/graph.hpp"

namespace echosim {

// Per-neighbor influence term f(O_j, O_i). Clamped to [-2, 2] (the widest
// possible opinion gap) and micro-quantized.
class InfluenceValue {
 public:
  InfluenceValue() = default;
  explicit InfluenceValue(double raw);
  double value() const { return v_; }
  bool operator==(const InfluenceValue&) const = default;

 private:
  double v_ = 0.0;
};

// Pairwise similarity g in [0, 1], micro-quantized.
class CompatibilityScore {
 public:
  CompatibilityScore() = default;
  explicit CompatibilityScore(double raw);
  double value() const { return v_; }
  bool operator==(const CompatibilityScore&) const = default;

 private:
  double v_ = 0.0;
};

struct EquationEngineParams {
  double mu = 0.5;       // uniform influence weight, in (0, 1]
  double epsilon = 0.4;  // bounded-confidence threshold, in (0, 2]
  void validate() const;
};

enum class EngineKind { Equation, Mock, Llm };

// What an engine sees of one user: identity, current opinion, and the
// recent-context window of posts (most recent last).
struct AgentView {
  UserId id = 0;
  OpinionValue opinion;
  std::span<const Post> recent;
};

AgentView agent_view(const UserState& user, int window);

// The pluggable opinion-engine contract: influence f, compatibility g, and
// post generation. Engines are stateless given their construction parameters;
// built-in engines never consume from the rng they are handed, which keeps
// draw sequences aligned across engine choices.
class OpinionEngine {
 public:
  virtual ~OpinionEngine() = default;
  virtual std::string_view name() const = 0;
  virtual InfluenceValue influence(const AgentView& neighbor, const AgentView& self) = 0;
  virtual CompatibilityScore compatibility(const AgentView& self, const AgentView& other) = 0;
  virtual Post generate_post(const AgentView& self, const Screen& screen, int step, Rng& rng) = 0;
  virtual int fallback_count() const { return 0; }
};

// Closed-form pieces shared by the equation engine and the mock transport,
// so both sides of the text protocol run the exact same arithmetic.
// f = mu * (o_j - o_i) inside the confidence bound |o_j - o_i| <= epsilon,
// 0 outside; g = 1 - |o_i - o_j| / 2. Both results are micro-quantized.
double equation_influence(const EquationEngineParams& params, double o_j, double o_i);
double equation_compatibility(double o_i, double o_j);

// DeGroot-style update over a list of stance values (one term per post):
// clamp(o + mean of f terms), unchanged when the list is empty.
OpinionValue opinion_after_posts(const EquationEngineParams& params,
                                 OpinionValue current,
                                 std::span<const double> post_stances);

// clamp(O_i + (1/|N|) * sum_j f(O_j, O_i)); O_i unchanged for empty N.
OpinionValue update_opinion(OpinionEngine& engine, const AgentView& self,
                            std::span<const AgentView> neighbors);

// Placeholder-text post carrying a stance value, used by the equation engine
// and by pairwise-mode steps.
Post make_stance_update_post(UserId author, int step, OpinionValue stance);

class EquationEngine : public OpinionEngine {
 public:
  explicit EquationEngine(EquationEngineParams params);
  std::string_view name() const override { return "equation"; }
  InfluenceValue influence(const AgentView& neighbor, const AgentView& self) override;
  CompatibilityScore compatibility(const AgentView& self, const AgentView& other) override;
  Post generate_post(const AgentView& self, const Screen& screen, int step, Rng& rng) override;
  const EquationEngineParams& params() const { return params_; }

 private:
  EquationEngineParams params_;
};

}  // namespace echosim
