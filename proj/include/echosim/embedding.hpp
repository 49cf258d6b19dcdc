#pragma once

#include <optional>
#include <string>
#include <vector>

#include "echosim/rng.hpp"

namespace echosim {

enum class EmbeddingSource { Real, Simulated };

std::string to_string(EmbeddingSource source);

// A batch of d-dimensional vectors with parallel record ids.
struct EmbeddingSet {
  int dim = 0;
  EmbeddingSource source = EmbeddingSource::Real;
  std::vector<std::string> ids;
  std::vector<std::vector<double>> vectors;

  void validate() const;  // throws FormatError / DimensionError
};

// File format: header "dim=<d> source=<real|simulated>", then one record
// per line: "<id>,<v1>,...,<vd>".
EmbeddingSet load_embeddings(const std::string& path);  // IoError / FormatError

// Each vector scaled to unit L2 norm (zero vectors left untouched). All
// clustering and distance statistics operate on this normalized form.
EmbeddingSet normalized(const EmbeddingSet& set);

struct ClusterAssignment {
  std::vector<int> labels;
  std::vector<std::vector<double>> centroids;
  // Inertia after each assign/recompute round; non-increasing.
  std::vector<double> inertia_history;
};

// Seeding picks the first centroid uniformly and the rest proportionally to
// squared distance from the chosen set; Lloyd rounds then alternate assign
// (nearest centroid, lowest index on ties) and mean recompute until labels
// stop changing or max_iters passes. An emptied cluster steals the farthest
// point from the largest cluster. Input is normalized internally.
ClusterAssignment kmeans(const EmbeddingSet& set, int k, Rng& rng, int max_iters = 300);
// throws TooFewPointsError when |vectors| < k, ConfigError when k < 1

// Mean over points of (b - a) / max(a, b); singletons and degenerate points
// (a = b = 0) contribute 0. Undefined for fewer than two clusters.
std::optional<double> silhouette(const EmbeddingSet& set, const ClusterAssignment& assignment);

struct ClusterDistances {
  double intra = 0.0;  // mean over clusters of mean pairwise member distance
  double inter = 0.0;  // mean pairwise centroid distance
};

std::optional<ClusterDistances> cluster_distances(const EmbeddingSet& set,
                                                  const ClusterAssignment& assignment);

}  // namespace echosim
