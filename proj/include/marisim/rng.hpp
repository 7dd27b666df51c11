#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace marisim::rng {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based generator: the output is a pure function of the key, so any
// draw can be reproduced without replaying a sequential stream.
constexpr std::uint64_t keyedBits(std::initializer_list<std::uint64_t> key) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t k : key) {
    h = mix64(h ^ mix64(k));
  }
  return h;
}

// Uniform in the open interval (0, 1).
constexpr double toUnitOpen(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

inline double rayleighFromUniform(double sigma, double u) {
  return sigma * std::sqrt(-2.0 * std::log1p(-u));
}

// Box-Muller, cosine branch.
inline double standardNormalFromUniform(double u1, double u2) {
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

// Derives a per-sensor stream seed so that adding a sensor never shifts
// another sensor's draws.
constexpr std::uint64_t streamSeed(std::uint64_t global_seed, std::string_view name) {
  std::uint64_t fnv = 0xcbf29ce484222325ULL;
  for (char c : name) {
    fnv ^= static_cast<unsigned char>(c);
    fnv *= 0x100000001b3ULL;
  }
  return mix64(global_seed ^ mix64(fnv));
}

// Convenience wrapper for draws keyed by (seed, counter..., lane).
class KeyedSampler {
 public:
  explicit constexpr KeyedSampler(std::uint64_t seed) : seed_(seed) {}

  double uniform(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0, std::uint64_t lane = 0) const {
    return toUnitOpen(keyedBits({seed_, a, b, c, lane}));
  }

  double normal(double stddev, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0, std::uint64_t lane = 0) const {
    const double u1 = uniform(a, b, c, 2 * lane + 100);
    const double u2 = uniform(a, b, c, 2 * lane + 101);
    return stddev * standardNormalFromUniform(u1, u2);
  }

  double rayleigh(double sigma, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0, std::uint64_t lane = 0) const {
    return rayleighFromUniform(sigma, uniform(a, b, c, lane + 200));
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

} // namespace marisim::rng
