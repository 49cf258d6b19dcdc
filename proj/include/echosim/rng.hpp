#pragma once

#include <cassert>
#include <cstdint>
#include <random>
#include <vector>

namespace echosim {

// Deterministic random source. mt19937_64 has a fully specified bit stream,
// and every draw helper here is hand-rolled, so sequences are reproducible
// across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  // Uniform in [0, n). Rejection sampling, no modulo bias.
  std::size_t uniform_index(std::size_t n) {
    assert(n > 0);
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t min = (0 - bound) % bound;  // 2^64 mod bound
    std::uint64_t x = gen_();
    while (x < min) x = gen_();
    return static_cast<std::size_t>(x % bound);
  }

  // After the call, pool[0..k) is a uniform sample without replacement.
  template <typename T>
  void partial_shuffle(std::vector<T>& pool, std::size_t k) {
    const std::size_t n = pool.size();
    if (k > n) k = n;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + uniform_index(n - i);
      std::swap(pool[i], pool[j]);
    }
  }

  // Index drawn with probability weights[i] / sum(weights).
  // A zero (or negative) total degenerates to a uniform draw.
  std::size_t weighted_index(const std::vector<double>& weights) {
    assert(!weights.empty());
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) return uniform_index(weights.size());
    const double x = uniform01() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (x < acc) return i;
    }
    return weights.size() - 1;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace echosim
