#include "echosim/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>

#include "echosim/error.hpp"

namespace echosim {

namespace {

double dist2(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

double dist(const std::vector<double>& a, const std::vector<double>& b) {
  return std::sqrt(dist2(a, b));
}

// Whole-string strtod with a finiteness check.
bool parse_double(const std::string& field, double& out) {
  if (field.empty()) return false;
  char* end = nullptr;
  out = std::strtod(field.c_str(), &end);
  return end == field.c_str() + field.size() && std::isfinite(out);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = line.find(sep, start);
    if (at == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, at - start));
    start = at + 1;
  }
}

}  // namespace

std::string to_string(EmbeddingSource source) {
  return source == EmbeddingSource::Real ? "real" : "simulated";
}

void EmbeddingSet::validate() const {
  if (dim < 2) throw FormatError("embedding dimension must be at least 2");
  if (ids.size() != vectors.size()) throw FormatError("id/vector count mismatch");
  for (const auto& v : vectors) {
    if (static_cast<int>(v.size()) != dim) throw FormatError("row dimension mismatch");
    for (double x : v) {
      if (!std::isfinite(x)) throw FormatError("non-finite embedding entry");
    }
  }
}

EmbeddingSet load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read embeddings file: " + path);

  std::string header;
  if (!std::getline(in, header)) throw FormatError("empty embeddings file: " + path);
  int dim = 0;
  char source_buf[32] = {0};
  if (std::sscanf(header.c_str(), "dim=%d source=%31s", &dim, source_buf) != 2) {
    throw FormatError("bad embeddings header: " + header);
  }
  EmbeddingSet set;
  set.dim = dim;
  const std::string source(source_buf);
  if (source == "real") {
    set.source = EmbeddingSource::Real;
  } else if (source == "simulated") {
    set.source = EmbeddingSource::Simulated;
  } else {
    throw FormatError("bad embeddings source: " + source);
  }

  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split(line, ',');
    if (static_cast<int>(fields.size()) != dim + 1 || fields[0].empty()) {
      throw FormatError("bad embeddings row at line " + std::to_string(line_no));
    }
    std::vector<double> vec(dim);
    for (int i = 0; i < dim; ++i) {
      if (!parse_double(fields[i + 1], vec[i])) {
        throw FormatError("bad embeddings value at line " + std::to_string(line_no));
      }
    }
    set.ids.push_back(fields[0]);
    set.vectors.push_back(std::move(vec));
  }
  set.validate();
  return set;
}

EmbeddingSet normalized(const EmbeddingSet& set) {
  EmbeddingSet out = set;
  for (auto& v : out.vectors) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (double& x : v) x /= norm;
    }
  }
  return out;
}

ClusterAssignment kmeans(const EmbeddingSet& set, int k, Rng& rng, int max_iters) {
  set.validate();
  if (k < 1) throw ConfigError("k must be at least 1");
  const std::size_t n = set.vectors.size();
  if (n < static_cast<std::size_t>(k)) {
    throw TooFewPointsError("need at least " + std::to_string(k) + " points, have " +
                            std::to_string(n));
  }

  const EmbeddingSet norm = normalized(set);
  const auto& x = norm.vectors;

  ClusterAssignment result;
  result.centroids.push_back(x[rng.uniform_index(n)]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = dist2(x[i], result.centroids[0]);
  while (static_cast<int>(result.centroids.size()) < k) {
    const std::size_t pick = rng.weighted_index(d2);
    result.centroids.push_back(x[pick]);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], dist2(x[i], result.centroids.back()));
    }
  }

  result.labels.assign(n, -1);
  for (int iter = 0; iter < max_iters; ++iter) {
    // Assign to the nearest centroid, lowest index winning ties.
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = dist2(x[i], result.centroids[0]);
      for (int c = 1; c < k; ++c) {
        const double d = dist2(x[i], result.centroids[c]);
        if (d < best_d) {
          best = c;
          best_d = d;
        }
      }
      if (result.labels[i] != best) {
        result.labels[i] = best;
        changed = true;
      }
    }

    // Refill any emptied cluster with the farthest point of the largest one.
    std::vector<std::size_t> counts(k, 0);
    for (int label : result.labels) ++counts[label];
    for (int empty = 0; empty < k; ++empty) {
      while (counts[empty] == 0) {
        int largest = static_cast<int>(
            std::max_element(counts.begin(), counts.end()) - counts.begin());
        std::size_t farthest = n;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (result.labels[i] != largest) continue;
          const double d = dist2(x[i], result.centroids[largest]);
          if (d > far_d) {
            far_d = d;
            farthest = i;
          }
        }
        result.labels[farthest] = empty;
        --counts[largest];
        ++counts[empty];
        changed = true;
      }
    }

    if (!changed) break;

    for (int c = 0; c < k; ++c) {
      std::vector<double> mean(set.dim, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        if (result.labels[i] != c) continue;
        for (int d = 0; d < set.dim; ++d) mean[d] += x[i][d];
      }
      for (double& v : mean) v /= static_cast<double>(counts[c]);
      result.centroids[c] = std::move(mean);
    }

    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) inertia += dist2(x[i], result.centroids[result.labels[i]]);
    result.inertia_history.push_back(inertia);
  }
  return result;
}

std::optional<double> silhouette(const EmbeddingSet& set, const ClusterAssignment& assignment) {
  const int k = static_cast<int>(assignment.centroids.size());
  if (k < 2) return std::nullopt;
  const std::size_t n = set.vectors.size();
  if (assignment.labels.size() != n) throw FormatError("assignment does not cover the set");

  const EmbeddingSet norm = normalized(set);
  const auto& x = norm.vectors;
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < n; ++i) members[assignment.labels[i]].push_back(i);

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int own = assignment.labels[i];
    if (members[own].size() < 2) continue;  // singleton contributes 0

    double a = 0.0;
    for (std::size_t j : members[own]) {
      if (j != i) a += dist(x[i], x[j]);
    }
    a /= static_cast<double>(members[own].size() - 1);

    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c == own || members[c].empty()) continue;
      double mean = 0.0;
      for (std::size_t j : members[c]) mean += dist(x[i], x[j]);
      mean /= static_cast<double>(members[c].size());
      b = std::min(b, mean);
    }

    if (a == 0.0 && b == 0.0) continue;  // coincident points contribute 0
    total += (b - a) / std::max(a, b);
  }
  return total / static_cast<double>(n);
}

std::optional<ClusterDistances> cluster_distances(const EmbeddingSet& set,
                                                  const ClusterAssignment& assignment) {
  const int k = static_cast<int>(assignment.centroids.size());
  if (k < 2) return std::nullopt;
  const std::size_t n = set.vectors.size();
  if (assignment.labels.size() != n) throw FormatError("assignment does not cover the set");

  const EmbeddingSet norm = normalized(set);
  const auto& x = norm.vectors;
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < n; ++i) members[assignment.labels[i]].push_back(i);

  ClusterDistances out;
  for (int c = 0; c < k; ++c) {
    const auto& ms = members[c];
    if (ms.size() < 2) continue;  // a singleton's mean pairwise distance is 0
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < ms.size(); ++i) {
      for (std::size_t j = i + 1; j < ms.size(); ++j) {
        sum += dist(x[ms[i]], x[ms[j]]);
        ++pairs;
      }
    }
    out.intra += sum / static_cast<double>(pairs);
  }
  out.intra /= static_cast<double>(k);

  std::size_t pairs = 0;
  for (int c = 0; c < k; ++c) {
    for (int d = c + 1; d < k; ++d) {
      out.inter += dist(assignment.centroids[c], assignment.centroids[d]);
      ++pairs;
    }
  }
  out.inter /= static_cast<double>(pairs);
  return out;
}

}  // namespace echosim
