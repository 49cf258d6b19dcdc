#include "echosim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "echosim/error.hpp"

namespace echosim {

InfluenceValue::InfluenceValue(double raw)
    : v_(quantize_micro(std::clamp(raw, -2.0, 2.0))) {}

CompatibilityScore::CompatibilityScore(double raw)
    : v_(quantize_micro(std::clamp(raw, 0.0, 1.0))) {}

void EquationEngineParams::validate() const {
  if (!(mu > 0.0 && mu <= 1.0)) throw ConfigError("mu must be in (0, 1]");
  if (!(epsilon > 0.0 && epsilon <= 2.0)) throw ConfigError("epsilon must be in (0, 2]");
}

AgentView agent_view(const UserState& user, int window) {
  return AgentView{user.id, user.opinion, recent_context(user, window)};
}

double equation_influence(const EquationEngineParams& params, double o_j, double o_i) {
  const double gap = o_j - o_i;
  if (std::fabs(gap) > params.epsilon) return 0.0;
  return quantize_micro(params.mu * gap);
}

double equation_compatibility(double o_i, double o_j) {
  return quantize_micro(1.0 - std::fabs(o_i - o_j) / 2.0);
}

OpinionValue opinion_after_posts(const EquationEngineParams& params,
                                 OpinionValue current,
                                 std::span<const double> post_stances) {
  if (post_stances.empty()) return current;
  double sum = 0.0;
  for (double stance : post_stances) {
    sum += equation_influence(params, stance, current.value());
  }
  const double shift = sum / static_cast<double>(post_stances.size());
  return OpinionValue(current.value() + shift);
}

OpinionValue update_opinion(OpinionEngine& engine, const AgentView& self,
                            std::span<const AgentView> neighbors) {
  if (neighbors.empty()) return self.opinion;
  double sum = 0.0;
  for (const AgentView& neighbor : neighbors) {
    sum += engine.influence(neighbor, self).value();
  }
  const double shift = sum / static_cast<double>(neighbors.size());
  return OpinionValue(self.opinion.value() + shift);
}

Post make_stance_update_post(UserId author, int step, OpinionValue stance) {
  Post post;
  post.author = author;
  post.step = step;
  post.origin = PostOrigin::Sim;
  post.text = "stance update " + format_micro(stance.value());
  post.stance = stance;
  return post;
}

EquationEngine::EquationEngine(EquationEngineParams params) : params_(params) {
  params_.validate();
}

InfluenceValue EquationEngine::influence(const AgentView& neighbor, const AgentView& self) {
  return InfluenceValue(
      equation_influence(params_, neighbor.opinion.value(), self.opinion.value()));
}

CompatibilityScore EquationEngine::compatibility(const AgentView& self, const AgentView& other) {
  return CompatibilityScore(
      equation_compatibility(self.opinion.value(), other.opinion.value()));
}

Post EquationEngine::generate_post(const AgentView& self, const Screen& screen, int step,
                                   Rng& /*rng*/) {
  std::vector<double> stances;
  stances.reserve(screen.posts.size());
  for (const Post& post : screen.posts) stances.push_back(post.stance.value());
  const OpinionValue updated = opinion_after_posts(params_, self.opinion, stances);
  return make_stance_update_post(self.id, step, updated);
}

}  // namespace echosim
