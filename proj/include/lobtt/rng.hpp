#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace lobtt {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Seed derivation: fold each component into the running state with
// splitmix64(state ^ component). Every (day, agent, phase) combination gets an
// independent stream, and adding agents, days, or phases never disturbs seeds
// that were already derived.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> parts) {
  std::uint64_t s = splitmix64(master);
  for (std::uint64_t p : parts) s = splitmix64(s ^ p);
  return s;
}

// mt19937_64 behind a few hand-rolled draw helpers. The standard distribution
// objects are implementation-defined, so everything that must reproduce
// bit-for-bit goes through these instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Unbiased integer in [0, n). n == 1 consumes no randomness.
  std::uint64_t bounded(std::uint64_t n) {
    assert(n > 0);
    if (n == 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

  // [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Geometric on {1, 2, ...} with the given mean (>= 1).
  std::int64_t geometric_at_least_one(double mean) {
    if (mean <= 1.0) return 1;
    const double p = 1.0 / mean;
    const double u = uniform01();
    const double k = 1.0 + std::floor(std::log1p(-u) / std::log1p(-p));
    if (k < 1.0) return 1;
    if (k > 1e9) return 1000000000;
    return static_cast<std::int64_t>(k);
  }

  double exponential(double mean) { return -mean * std::log1p(-uniform01()); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace lobtt
