#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace ssi {

/// Deterministic 64-bit counter-based generator (splitmix64). The k-th output
/// is a bijective mix of seed + k*gamma, so streams are reproducible across
/// runs and platforms for a given seed. Replication r of a scenario seeded s
/// uses derive_seed(s, r).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log1p(-u1));
    double theta = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return r * std::cos(theta);
  }

  /// Standard exponential (mean 1).
  double exponential() { return -std::log1p(-uniform()); }

  bool bernoulli(double prob) { return uniform() < prob; }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

  /// Fisher-Yates permutation of {0, .., n-1}.
  template <typename IndexT>
  std::vector<IndexT> permutation(IndexT n) {
    std::vector<IndexT> perm(static_cast<std::size_t>(n));
    for (IndexT i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (IndexT i = n - 1; i > 0; --i) {
      auto j = static_cast<IndexT>(below(static_cast<std::uint64_t>(i) + 1));
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    return perm;
  }

  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    Rng mixer(seed ^ (0xd1342543de82ef95ull * (stream + 1)));
    return mixer.next_u64();
  }

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace ssi
