#include "echosim/metrics.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <numeric>

#include "echosim/error.hpp"

namespace echosim {

namespace {

struct Undirected {
  std::vector<std::vector<UserId>> adj;  // sorted, no self-loops, no duplicates
  std::size_t m = 0;
};

Undirected undirected_projection(const SocialGraph& graph) {
  Undirected und;
  und.adj.resize(graph.user_count());
  for (UserId target = 0; target < graph.user_count(); ++target) {
    for (UserId source : graph.in_neighbors(target)) {
      und.adj[source].push_back(target);
      und.adj[target].push_back(source);
    }
  }
  for (auto& nbrs : und.adj) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    und.m += nbrs.size();
  }
  und.m /= 2;
  return und;
}

std::vector<int> component_labels(const Undirected& und) {
  const std::size_t n = und.adj.size();
  std::vector<int> label(n, -1);
  int next = 0;
  for (UserId start = 0; start < n; ++start) {
    if (label[start] != -1) continue;
    label[start] = next;
    std::deque<UserId> queue{start};
    while (!queue.empty()) {
      const UserId v = queue.front();
      queue.pop_front();
      for (UserId u : und.adj[v]) {
        if (label[u] == -1) {
          label[u] = next;
          queue.push_back(u);
        }
      }
    }
    ++next;
  }
  return label;
}

// Q scaled by (2m)^2, exactly: sum_c (2 * 2m * E_c - D_c^2).
std::int64_t q_numerator(const Undirected& und, const std::vector<int>& labels, int count) {
  std::vector<std::int64_t> intra(count, 0);
  std::vector<std::int64_t> degree(count, 0);
  for (UserId v = 0; v < und.adj.size(); ++v) {
    degree[labels[v]] += static_cast<std::int64_t>(und.adj[v].size());
    for (UserId u : und.adj[v]) {
      if (u > v && labels[u] == labels[v]) ++intra[labels[v]];
    }
  }
  const std::int64_t two_m = static_cast<std::int64_t>(2 * und.m);
  std::int64_t num = 0;
  for (int c = 0; c < count; ++c) num += 2 * two_m * intra[c] - degree[c] * degree[c];
  return num;
}

// Weighted multigraph for one aggregation level.
struct LevelGraph {
  std::vector<std::vector<std::pair<int, std::int64_t>>> adj;  // (neighbor, weight)
  std::vector<std::int64_t> self_loop;  // internal weight kept by a node
  std::vector<std::int64_t> degree;     // sum of incident weight, self loops twice
  std::int64_t two_m = 0;
  int n = 0;
};

LevelGraph level_from(const Undirected& und) {
  LevelGraph level;
  level.n = static_cast<int>(und.adj.size());
  level.adj.resize(level.n);
  level.self_loop.assign(level.n, 0);
  level.degree.assign(level.n, 0);
  for (UserId v = 0; v < und.adj.size(); ++v) {
    for (UserId u : und.adj[v]) level.adj[v].emplace_back(static_cast<int>(u), 1);
    level.degree[v] = static_cast<std::int64_t>(und.adj[v].size());
    level.two_m += level.degree[v];
  }
  return level;
}

// Sweeps nodes in ascending order, moving each to the neighboring community
// with the best exact modularity gain, until a full sweep moves nothing.
// Returns whether any move happened at all.
bool local_phase(const LevelGraph& level, std::vector<int>& comm) {
  std::vector<std::int64_t> tot(level.n, 0);
  for (int v = 0; v < level.n; ++v) tot[comm[v]] += level.degree[v];

  bool any_move = false;
  bool moved = true;
  while (moved) {
    moved = false;
    for (int v = 0; v < level.n; ++v) {
      const int cur = comm[v];
      std::map<int, std::int64_t> weight_to;  // community -> k_{v->c}, ordered
      for (const auto& [u, w] : level.adj[v]) weight_to[comm[u]] += w;
      tot[cur] -= level.degree[v];

      // score(c) = 2m * k_{v->c} - tot_c * k_v, v excluded from tot.
      int best = cur;
      std::int64_t best_score = level.two_m * weight_to[cur] - tot[cur] * level.degree[v];
      for (const auto& [c, k] : weight_to) {
        if (c == cur) continue;
        const std::int64_t score = level.two_m * k - tot[c] * level.degree[v];
        if (score > best_score) {
          best = c;
          best_score = score;
        }
      }
      comm[v] = best;
      tot[best] += level.degree[v];
      if (best != cur) {
        moved = true;
        any_move = true;
      }
    }
  }
  return any_move;
}

// Renumbers arbitrary labels to contiguous 0..count-1, ascending.
int renumber(std::vector<int>& labels) {
  std::map<int, int> dense;
  for (int l : labels) dense.emplace(l, 0);
  int next = 0;
  for (auto& [l, d] : dense) d = next++;
  for (int& l : labels) l = dense[l];
  return next;
}

LevelGraph aggregate(const LevelGraph& level, const std::vector<int>& comm, int count) {
  LevelGraph next;
  next.n = count;
  next.adj.resize(count);
  next.self_loop.assign(count, 0);
  next.degree.assign(count, 0);
  next.two_m = level.two_m;

  std::map<std::pair<int, int>, std::int64_t> weights;
  for (int v = 0; v < level.n; ++v) {
    next.self_loop[comm[v]] += level.self_loop[v];
    for (const auto& [u, w] : level.adj[v]) {
      if (u < v) continue;  // count each undirected pair once (u==v cannot occur)
      const int a = std::min(comm[v], comm[u]);
      const int b = std::max(comm[v], comm[u]);
      weights[{a, b}] += w;
    }
  }
  for (const auto& [pair, w] : weights) {
    if (pair.first == pair.second) {
      next.self_loop[pair.first] += w;
    } else {
      next.adj[pair.first].emplace_back(pair.second, w);
      next.adj[pair.second].emplace_back(pair.first, w);
    }
  }
  for (int v = 0; v < count; ++v) {
    next.degree[v] = 2 * next.self_loop[v];
    for (const auto& [u, w] : next.adj[v]) next.degree[v] += w;
  }
  return next;
}

// Multi-level ascent from an initial assignment over the original nodes.
std::vector<int> greedy_ascent(const Undirected& und, std::vector<int> init) {
  LevelGraph level = level_from(und);
  std::vector<int> node_of(und.adj.size());
  std::iota(node_of.begin(), node_of.end(), 0);
  std::vector<int> comm = std::move(init);

  while (true) {
    const bool moved = local_phase(level, comm);
    const int count = renumber(comm);
    for (std::size_t o = 0; o < node_of.size(); ++o) node_of[o] = comm[node_of[o]];
    if (!moved || count == level.n) break;
    level = aggregate(level, comm, count);
    comm.resize(count);
    std::iota(comm.begin(), comm.end(), 0);
  }
  return node_of;
}

}  // namespace

Partition singleton_partition(const SocialGraph& graph) {
  Partition p;
  p.count = static_cast<int>(graph.user_count());
  p.community.resize(graph.user_count());
  std::iota(p.community.begin(), p.community.end(), 0);
  return p;
}

Partition components_partition(const SocialGraph& graph) {
  const Undirected und = undirected_projection(graph);
  Partition p;
  p.community = component_labels(und);
  p.count = p.community.empty()
                ? 0
                : *std::max_element(p.community.begin(), p.community.end()) + 1;
  return p;
}

std::optional<double> density(const SocialGraph& graph) {
  const double n = static_cast<double>(graph.user_count());
  if (n < 2.0) return std::nullopt;
  return static_cast<double>(graph.edge_count()) / (n * (n - 1.0));
}

std::optional<double> modularity_of(const SocialGraph& graph, const Partition& partition) {
  if (partition.community.size() != graph.user_count()) {
    throw FormatError("partition does not cover the graph");
  }
  for (int label : partition.community) {
    if (label < 0 || label >= partition.count) throw FormatError("partition label out of range");
  }
  const Undirected und = undirected_projection(graph);
  if (und.m == 0) return std::nullopt;
  const std::int64_t num = q_numerator(und, partition.community, partition.count);
  const double two_m = 2.0 * static_cast<double>(und.m);
  return static_cast<double>(num) / (two_m * two_m);
}

Partition detect_communities(const SocialGraph& graph, Rng& /*rng*/) {
  const Undirected und = undirected_projection(graph);
  if (und.m == 0) return singleton_partition(graph);

  std::vector<int> singles(und.adj.size());
  std::iota(singles.begin(), singles.end(), 0);
  std::vector<int> best = greedy_ascent(und, std::move(singles));
  int best_count = renumber(best);
  std::int64_t best_num = q_numerator(und, best, best_count);

  // A disconnected graph can, in principle, beat the ascent with its plain
  // component split; restarting the ascent from that split keeps the result
  // at least as good because single-node moves only ever improve Q.
  std::vector<int> comps = component_labels(und);
  const int comp_count = renumber(comps);
  if (comp_count > 1 && q_numerator(und, comps, comp_count) > best_num) {
    best = greedy_ascent(und, std::move(comps));
    best_count = renumber(best);
  }

  Partition p;
  p.community = std::move(best);
  p.count = best_count;
  return p;
}

double clustering_coefficient(const SocialGraph& graph) {
  const Undirected und = undirected_projection(graph);
  const std::size_t n = und.adj.size();
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (UserId v = 0; v < n; ++v) {
    const auto& nbrs = und.adj[v];
    if (nbrs.size() < 2) continue;
    std::size_t links = 0;
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      for (std::size_t j = i + 1; j < nbrs.size(); ++j) {
        if (std::binary_search(und.adj[nbrs[i]].begin(), und.adj[nbrs[i]].end(), nbrs[j])) {
          ++links;
        }
      }
    }
    const double possible =
        static_cast<double>(nbrs.size()) * static_cast<double>(nbrs.size() - 1) / 2.0;
    sum += static_cast<double>(links) / possible;
  }
  return sum / static_cast<double>(n);
}

std::optional<double> average_path_length(const SocialGraph& graph) {
  if (graph.user_count() < 2) return std::nullopt;
  const Undirected und = undirected_projection(graph);
  const std::vector<int> labels = component_labels(und);

  std::vector<std::size_t> sizes;
  for (int l : labels) {
    if (static_cast<std::size_t>(l) >= sizes.size()) sizes.resize(l + 1, 0);
    ++sizes[l];
  }
  // Component 0 holds node 0, so on ties the earliest (smallest-id)
  // component wins naturally.
  int largest = 0;
  for (std::size_t c = 1; c < sizes.size(); ++c) {
    if (sizes[c] > sizes[largest]) largest = static_cast<int>(c);
  }
  if (sizes[largest] < 2) return std::nullopt;

  std::uint64_t total = 0;
  std::uint64_t pairs = 0;
  std::vector<int> dist(und.adj.size());
  for (UserId start = 0; start < und.adj.size(); ++start) {
    if (labels[start] != largest) continue;
    std::fill(dist.begin(), dist.end(), -1);
    dist[start] = 0;
    std::deque<UserId> queue{start};
    while (!queue.empty()) {
      const UserId v = queue.front();
      queue.pop_front();
      for (UserId u : und.adj[v]) {
        if (dist[u] == -1) {
          dist[u] = dist[v] + 1;
          total += static_cast<std::uint64_t>(dist[u]);
          ++pairs;
          queue.push_back(u);
        }
      }
    }
  }
  return static_cast<double>(total) / static_cast<double>(pairs);
}

StanceThresholds::StanceThresholds()
    : favor_min(quantize_micro(1.0 / 3.0)), oppose_max(-quantize_micro(1.0 / 3.0)) {}

StanceLabel discretize_stance(OpinionValue opinion, const StanceThresholds& thresholds) {
  if (opinion.value() >= thresholds.favor_min) return StanceLabel::Favor;
  if (opinion.value() <= thresholds.oppose_max) return StanceLabel::Oppose;
  return StanceLabel::Neutral;
}

std::optional<double> stance_accuracy(const SocialGraph& graph,
                                      const StanceThresholds& thresholds) {
  std::size_t labeled = 0;
  std::size_t matched = 0;
  for (UserId v = 0; v < graph.user_count(); ++v) {
    const UserState& user = graph.user(v);
    if (!user.ground_truth) continue;
    ++labeled;
    if (discretize_stance(user.opinion, thresholds) == *user.ground_truth) ++matched;
  }
  if (labeled == 0) return std::nullopt;
  return static_cast<double>(matched) / static_cast<double>(labeled);
}

MetricsReport compute_metrics(const SocialGraph& graph, int step) {
  MetricsReport report;
  report.step = step;
  Rng rng(0);  // detect_communities never consumes it
  const Partition detected = detect_communities(graph, rng);
  report.modularity = modularity_of(graph, detected);
  report.clustering = clustering_coefficient(graph);
  report.path_length = average_path_length(graph);
  report.density = density(graph);
  report.stance_accuracy = stance_accuracy(graph);
  return report;
}

}  // namespace echosim
