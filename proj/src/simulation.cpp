#include "echosim/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "echosim/error.hpp"

namespace echosim {

UpdateMode update_mode_from_string(const std::string& s) {
  if (s == "pairwise") return UpdateMode::Pairwise;
  if (s == "generative") return UpdateMode::Generative;
  throw ConfigError("unknown update_mode: " + s + " (expected pairwise or generative)");
}

std::string to_string(UpdateMode mode) {
  return mode == UpdateMode::Pairwise ? "pairwise" : "generative";
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::MaxSteps: return "max_steps";
    case StopReason::Stabilized: return "stabilized";
    case StopReason::Aborted: return "aborted";
  }
  return "max_steps";
}

void SimConfig::validate() const {
  if (max_steps < 0) throw ConfigError("max_steps must be >= 0");
  if (screen_size < 1) throw ConfigError("screen_size must be >= 1");
  if (history_window < 1) throw ConfigError("history_window must be >= 1");
  if (!(rec_fraction >= 0.0 && rec_fraction <= 1.0))
    throw ConfigError("rec_fraction must be in [0, 1]");
  if (!(q_unfollow >= 0.0 && q_unfollow <= 1.0))
    throw ConfigError("q_unfollow must be in [0, 1]");
  if (!(stability_delta >= 0.0)) throw ConfigError("stability_delta must be >= 0");
  if (stability_window < 1) throw ConfigError("stability_window must be >= 1");
  params.validate();
}

namespace {

constexpr std::size_t kCandidatePool = 10;
constexpr std::size_t kFofTarget = 5;

// Candidates the actor could follow right now: not themselves, not already
// followed, and not one of this event's unfollows. Up to kFofTarget
// friends-of-friends sampled uniformly, the rest uniform over everyone else
// eligible.
std::vector<UserId> follow_candidates(const SocialGraph& graph, UserId actor,
                                      const std::vector<UserId>& unfollowed, Rng& rng) {
  const auto eligible = [&](UserId u) {
    return u != actor && !graph.has_edge(u, actor) &&
           std::find(unfollowed.begin(), unfollowed.end(), u) == unfollowed.end();
  };

  std::vector<UserId> fof;
  for (UserId j : graph.in_neighbors(actor)) {
    for (UserId k : graph.in_neighbors(j)) {
      if (eligible(k)) fof.push_back(k);
    }
  }
  std::sort(fof.begin(), fof.end());
  fof.erase(std::unique(fof.begin(), fof.end()), fof.end());

  std::vector<UserId> pool;
  const std::size_t n_fof = std::min(kFofTarget, fof.size());
  rng.partial_shuffle(fof, n_fof);
  pool.assign(fof.begin(), fof.begin() + static_cast<std::ptrdiff_t>(n_fof));

  if (pool.size() < kCandidatePool) {
    std::vector<UserId> others;
    for (UserId u = 0; u < graph.user_count(); ++u) {
      if (!eligible(u)) continue;
      if (std::find(pool.begin(), pool.end(), u) != pool.end()) continue;
      others.push_back(u);
    }
    const std::size_t fill = std::min(kCandidatePool - pool.size(), others.size());
    rng.partial_shuffle(others, fill);
    pool.insert(pool.end(), others.begin(), others.begin() + static_cast<std::ptrdiff_t>(fill));
  }
  return pool;
}

}  // namespace

std::pair<std::vector<UserId>, std::vector<UserId>> rewire(SocialGraph& graph, UserId actor,
                                                           OpinionEngine& engine,
                                                           const SimConfig& config, Rng& rng) {
  std::vector<UserId> unfollowed;
  std::vector<UserId> followed;
  const std::vector<UserId> neighbors = graph.in_neighbors(actor);  // snapshot
  const AgentView self = agent_view(graph.user(actor), config.history_window);

  const auto compat = [&](UserId other) {
    return engine.compatibility(self, agent_view(graph.user(other), config.history_window))
        .value();
  };

  for (UserId j : neighbors) {
    const double g = compat(j);
    if (!rng.bernoulli(config.q_unfollow * (1.0 - g))) continue;

    if (!config.paired_rewiring) {
      graph.remove_edge(j, actor);
      unfollowed.push_back(j);
      continue;
    }

    graph.remove_edge(j, actor);
    unfollowed.push_back(j);
    const std::vector<UserId> pool = follow_candidates(graph, actor, unfollowed, rng);
    if (pool.empty()) {
      // No one to pair the unfollow with; keep the edge so the count holds.
      unfollowed.pop_back();
      graph.add_edge(j, actor);
      continue;
    }
    std::vector<double> weights;
    weights.reserve(pool.size());
    for (UserId k : pool) weights.push_back(compat(k));
    const UserId chosen = pool[rng.weighted_index(weights)];
    graph.add_edge(chosen, actor);
    followed.push_back(chosen);
  }

  if (!config.paired_rewiring) {
    for (UserId k : follow_candidates(graph, actor, unfollowed, rng)) {
      if (rng.bernoulli(config.q_unfollow * compat(k))) {
        graph.add_edge(k, actor);
        followed.push_back(k);
      }
    }
  }
  return {std::move(unfollowed), std::move(followed)};
}

StepEvent step(SocialGraph& graph, int step_index, const SimConfig& config,
               OpinionEngine& engine, Rng& rng) {
  StepEvent event;
  event.step = step_index;
  event.actor = static_cast<UserId>(rng.uniform_index(graph.user_count()));
  event.opinion_before = graph.user(event.actor).opinion;

  const Screen screen =
      build_screen(graph, event.actor, config.screen_size, config.rec_fraction, rng);

  if (config.update_mode == UpdateMode::Generative) {
    const AgentView self = agent_view(graph.user(event.actor), config.history_window);
    event.new_post = engine.generate_post(self, screen, event.step, rng);
    event.opinion_after = event.new_post.stance;
  } else {
    const AgentView self = agent_view(graph.user(event.actor), config.history_window);
    std::vector<AgentView> neighbor_views;
    for (UserId j : graph.in_neighbors(event.actor)) {
      neighbor_views.push_back(agent_view(graph.user(j), config.history_window));
    }
    event.opinion_after = update_opinion(engine, self, neighbor_views);
    event.new_post = make_stance_update_post(event.actor, event.step, event.opinion_after);
  }
  graph.user_mut(event.actor).opinion = event.opinion_after;

  auto [unfollowed, followed] = rewire(graph, event.actor, engine, config, rng);
  event.unfollowed = std::move(unfollowed);
  event.followed = std::move(followed);

  graph.user_mut(event.actor).history.push_back(event.new_post);
  return event;
}

RunResult run(const SocialGraph& initial, const SimConfig& config, OpinionEngine& engine,
              const StepObserver& observer) {
  config.validate();
  if (initial.user_count() == 0) throw ConfigError("cannot simulate an empty graph");

  RunResult result;
  result.final_graph = initial;
  Rng rng(config.seed);
  int quiet_streak = 0;
  result.stopped_reason = StopReason::MaxSteps;

  for (int s = 0; s < config.max_steps; ++s) {
    StepEvent event;
    try {
      event = step(result.final_graph, s + 1, config, engine, rng);
    } catch (const TransportError& e) {
      result.stopped_reason = StopReason::Aborted;
      result.error = e.what();
      break;
    } catch (const ApiError& e) {
      result.stopped_reason = StopReason::Aborted;
      result.error = e.what();
      break;
    }
    result.events.push_back(std::move(event));
    if (observer) observer(result.final_graph, result.events.back());

    const StepEvent& done = result.events.back();
    const bool quiet =
        std::fabs(done.opinion_after.value() - done.opinion_before.value()) <
            config.stability_delta &&
        done.unfollowed.empty() && done.followed.empty();
    quiet_streak = quiet ? quiet_streak + 1 : 0;
    if (quiet_streak >= config.stability_window) {
      result.stopped_reason = StopReason::Stabilized;
      break;
    }
  }
  result.fallback_count = engine.fallback_count();
  return result;
}

SocialGraph replay(const SocialGraph& initial, std::span<const StepEvent> events) {
  SocialGraph graph = initial;
  for (const StepEvent& event : events) {
    graph.user_mut(event.actor).opinion = event.opinion_after;
    for (UserId j : event.unfollowed) graph.remove_edge(j, event.actor);
    for (UserId k : event.followed) graph.add_edge(k, event.actor);
    graph.user_mut(event.actor).history.push_back(event.new_post);
  }
  return graph;
}

}  // namespace echosim
