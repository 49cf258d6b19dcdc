#pragma once

#include <optional>
#include <vector>

#include "echosim/graph.hpp"
#include "echosim/rng.hpp"

namespace echosim {

// Community labels per UserId, contiguous from 0.
struct Partition {
  std::vector<int> community;
  int count = 0;

  bool operator==(const Partition&) const = default;
};

Partition singleton_partition(const SocialGraph& graph);
// Connected components of the undirected projection, labeled in order of
// their smallest member id.
Partition components_partition(const SocialGraph& graph);

// Directed density m / (n * (n - 1)); undefined below two users.
std::optional<double> density(const SocialGraph& graph);

// Newman modularity Q on the undirected unweighted projection:
// Q = sum_c (E_c / m - (D_c / 2m)^2). Undefined on a zero-edge graph.
std::optional<double> modularity_of(const SocialGraph& graph, const Partition& partition);

// Greedy modularity ascent: node sweeps in ascending id order until no
// single-node move improves Q, then community aggregation, repeated across
// levels. Exact integer arithmetic decides every comparison, so the result
// is deterministic; the rng parameter is accepted for interface stability
// and never consumed. The ascent runs from singletons and never returns a
// partition scoring below the connected-components partition.
Partition detect_communities(const SocialGraph& graph, Rng& rng);

// Average local clustering on the undirected projection; degree < 2
// contributes 0.
double clustering_coefficient(const SocialGraph& graph);

// Mean shortest-path length over pairs inside the largest component of the
// undirected projection (ties broken toward the component holding the
// smallest id). Undefined when that component is a single node.
std::optional<double> average_path_length(const SocialGraph& graph);

// Closed boundaries at the micro-quantized thirds of [-1, 1], matching the
// precision opinions are stored at: >= favor_min is favor, <= oppose_max is
// oppose, neutral between.
struct StanceThresholds {
  double favor_min;
  double oppose_max;
  StanceThresholds();
};

StanceLabel discretize_stance(OpinionValue opinion, const StanceThresholds& thresholds = {});

// Fraction of labeled users whose discretized opinion matches their ground
// truth; undefined when no user carries a label.
std::optional<double> stance_accuracy(const SocialGraph& graph,
                                      const StanceThresholds& thresholds = {});

struct MetricsReport {
  int step = 0;
  std::optional<double> modularity;  // of the detected communities
  double clustering = 0.0;
  std::optional<double> path_length;
  std::optional<double> density;
  std::optional<double> stance_accuracy;

  bool operator==(const MetricsReport&) const = default;
};

MetricsReport compute_metrics(const SocialGraph& graph, int step);

}  // namespace echosim
