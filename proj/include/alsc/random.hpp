#pragma once

// Deterministic sampling helpers on top of std::mt19937_64.
// The engine's output sequence is fixed by the standard; the standard
// library's *distributions* are not, so every distribution used for
// reproducible artifacts (splits, scenes, GA runs) is hand-rolled here.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace alsc {

using Rng = std::mt19937_64;

// Uniform integer in [0, n) via rejection, bias-free.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Box-Muller, no state carried between calls.
inline double normal(Rng& rng, double mean = 0.0, double sigma = 1.0) {
  double u1 = uniform01(rng);
  double u2 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double r = std::sqrt(-2.0 * std::log(u1));
  return mean + sigma * r * std::cos(2.0 * M_PI * u2);
}

template <typename T>
void shuffle_vec(Rng& rng, std::vector<T>& v) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[uniform_index(rng, i)]);
  }
}

// n draws without replacement from `pool`, partial Fisher-Yates.
// Result order is the draw order.
template <typename T>
std::vector<T> sample_without_replacement(Rng& rng, std::vector<T> pool,
                                          std::size_t n) {
  if (n > pool.size()) n = pool.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + uniform_index(rng, pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(n);
  return pool;
}

// Stateless per-item generator: hash a (seed, index) pair into an engine
// seed so per-point noise is order-independent.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace alsc
