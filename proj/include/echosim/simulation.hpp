#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "echosim/engine.hpp"
#include "echosim/graph.hpp"
#include "echosim/rng.hpp"

namespace echosim {

enum class UpdateMode { Pairwise, Generative };

UpdateMode update_mode_from_string(const std::string& s);  // throws ConfigError
std::string to_string(UpdateMode mode);

struct SimConfig {
  std::uint64_t seed = 1;
  int max_steps = 2000;
  int screen_size = 10;
  int history_window = 10;
  double rec_fraction = 0.25;
  double q_unfollow = 0.3;
  bool paired_rewiring = true;
  EquationEngineParams params;  // mu, epsilon
  EngineKind engine = EngineKind::Equation;
  UpdateMode update_mode = UpdateMode::Generative;
  // A run stops early once `stability_window` consecutive steps each moved
  // no opinion by `stability_delta` or more and changed no edge. Setting
  // stability_delta to 0 disables early stopping.
  double stability_delta = 0.01;
  int stability_window = 100;

  void validate() const;  // throws ConfigError
};

// Audit record of one step: who acted, what they posted, and every edge
// change. Replaying these against the initial graph reproduces the final
// graph exactly.
struct StepEvent {
  int step = 0;
  UserId actor = 0;
  Post new_post;
  std::vector<UserId> unfollowed;
  std::vector<UserId> followed;
  OpinionValue opinion_before;
  OpinionValue opinion_after;

  bool operator==(const StepEvent&) const = default;
};

enum class StopReason { MaxSteps, Stabilized, Aborted };

std::string to_string(StopReason reason);

struct RunResult {
  SocialGraph final_graph;
  std::vector<StepEvent> events;
  StopReason stopped_reason = StopReason::MaxSteps;
  int fallback_count = 0;
  std::string error;  // non-empty only when Aborted
};

// One activation: (1) uniform actor draw, (2) screen build, (3) opinion
// update — generative mode derives it from a generated post over the
// screen, pairwise mode averages per-neighbor influence and synthesizes the
// post — (4) rewiring at the updated opinion, (5) post appended to history.
StepEvent step(SocialGraph& graph, int step_index, const SimConfig& config,
               OpinionEngine& engine, Rng& rng);

// For each neighbor j of actor (snapshot, ascending), unfollow with
// probability q_unfollow * (1 - g). With paired rewiring every unfollow is
// immediately matched by one follow drawn from a 10-candidate pool (up to 5
// friends-of-friends sampled uniformly, filled with uniform non-neighbors)
// with probability proportional to g — and an unfollow with no available
// candidate is skipped, so the edge count never drifts. Unpaired mode
// instead runs one independent Bernoulli(q_unfollow * g) per candidate
// after the unfollow sweep. Users unfollowed in this call are excluded from
// candidate pools.
std::pair<std::vector<UserId>, std::vector<UserId>> rewire(SocialGraph& graph, UserId actor,
                                                           OpinionEngine& engine,
                                                           const SimConfig& config, Rng& rng);

using StepObserver = std::function<void(const SocialGraph&, const StepEvent&)>;

// Runs steps until max_steps or stabilization. Transport-level engine
// failures abort the run, preserving the events executed so far.
RunResult run(const SocialGraph& initial, const SimConfig& config, OpinionEngine& engine,
              const StepObserver& observer = {});

// Applies an event log to a graph snapshot; the result after a full log
// equals the run's final graph.
SocialGraph replay(const SocialGraph& initial, std::span<const StepEvent> events);

}  // namespace echosim
