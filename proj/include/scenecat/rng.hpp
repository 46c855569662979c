#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace scenecat {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Hash-chains a master seed with a path of stream identifiers, so that every
// consumer (parameter init, per-epoch shuffles, per-simulation streams, ...)
// gets an independent deterministic stream.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t state = master ^ 0xa02bdbf7bb3c0a7ULL;
  std::uint64_t out = splitmix64(state);
  for (std::uint64_t step : path) {
    state ^= step + 0x9e3779b97f4a7c15ULL;
    out = splitmix64(state);
  }
  return out;
}

inline std::mt19937_64 seeded_engine(std::uint64_t master,
                                     std::initializer_list<std::uint64_t> path = {}) {
  return std::mt19937_64(derive_seed(master, path));
}

// Uniform double in [0, 1) using the top 53 bits; avoids the
// implementation-defined behavior of std::uniform_real_distribution.
inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller (cosine branch); 1−u keeps the log finite.
inline double gaussian(std::mt19937_64& rng) {
  const double u1 = 1.0 - uniform_unit(rng);
  const double u2 = uniform_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

// Unbiased index in [0, n) via 128-bit multiply-shift with rejection.
inline std::size_t bounded_index(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  std::uint64_t x = rng();
  __uint128_t m = static_cast<__uint128_t>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = rng();
      m = static_cast<__uint128_t>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::size_t>(m >> 64);
}

// In-place Fisher-Yates shuffle with the engine above; std::shuffle's
// dispatch is implementation-defined, this one is pinned.
template <typename T>
void deterministic_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = bounded_index(rng, i);
    std::swap(items[i - 1], items[j]);
  }
}

// Walker/Vose alias table for O(1) categorical sampling. Zero-weight
// categories are representable but never returned.
class AliasTable {
 public:
  explicit AliasTable(const std::vector<double>& weights);

  int sample(std::mt19937_64& rng) const {
    const std::size_t k = bounded_index(rng, prob_.size());
    return uniform_unit(rng) < prob_[k] ? static_cast<int>(k) : alias_[k];
  }

  int size() const { return static_cast<int>(prob_.size()); }

 private:
  std::vector<double> prob_;
  std::vector<int> alias_;
};

}  // namespace scenecat
