#pragma once

// Reproducible randomness. The engine is the standard 64-bit Mersenne
// Twister (std::mt19937_64), whose output sequence is fixed by the C++
// standard. The distributions below are spelled out here instead of using
// <random>'s, whose algorithms differ between standard libraries:
//
//   uniform()       = (next() >> 11) * 2^-53, in [0, 1)
//   uniform_int(n)  = rejection sampling on next() below the largest
//                     multiple of n, then modulo n
//   normal()        = Box-Muller on two uniform() draws (cosine branch)

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace tweetner {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  double normal() {
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

/// Seed for a derived stream (worker, shard, pipeline) of a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  // splitmix64 finalizer over the pair
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace tweetner
