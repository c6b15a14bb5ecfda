// Seeded random number generation.
//
// All stochastic draws in the library go through Rng so that a run is a pure
// function of its seed. The engine is std::mt19937_64 (bit-exact sequence by
// the C++ standard); the uniform and normal transforms are implemented here
// instead of using std::*_distribution, whose output is implementation
// defined. Substreams are derived with a splitmix64 mix so that independent
// components (per object class, per frame, per trial) never share draws.
#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "sefm/geometry.hpp"

namespace sefm {

// splitmix64 step; also used to mix seeds for substreams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream * 0xd1342543de82ef95ULL + 1));
}

inline std::uint64_t hash_tag(std::string_view tag) {
  // FNV-1a, enough to separate named substreams.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                                 std::uint64_t stream = 0) {
  return derive_seed(derive_seed(seed, hash_tag(tag)), stream);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

  // Box-Muller; draws two uniforms per call and keeps the cosine branch so
  // the consumption pattern stays fixed.
  double normal(double mean = 0.0, double sigma = 1.0) {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sigma * r * std::cos(2.0 * kPi * u2);
  }

  Vec2 normal2(const Vec2& mean, double sigma) {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    const double r = std::sqrt(-2.0 * std::log(u1));
    return {mean.x + sigma * r * std::cos(2.0 * kPi * u2),
            mean.y + sigma * r * std::sin(2.0 * kPi * u2)};
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sefm
