#ifndef STREAMSYNC_RNG_HPP_
#define STREAMSYNC_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>

#include "streamsync/timebase.hpp"

namespace streamsync {

using Rng = std::mt19937_64;

// splitmix64 finalizer; decorrelates structured seed inputs.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from a master seed and up to three
// salts (trial index, device index, stream tag). Adding a device or stream
// never perturbs seeds derived with other salts.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                                    std::uint64_t c = 0) {
  std::uint64_t z = mix64(master);
  z = mix64(z ^ mix64(a + 0x632be59bd9b4e019ULL));
  z = mix64(z ^ mix64(b + 0x9e6c63d0876a9a47ULL));
  z = mix64(z ^ mix64(c + 0xc2b2ae3d27d4eb4fULL));
  return z;
}

// Distribution sampling is hand-rolled from raw engine output so that the
// sequences are identical across standard library implementations.

inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + uniform01(rng) * (hi - lo);
}

inline Duration uniform_duration(Rng& rng, Duration lo, Duration hi) {
  return lo + static_cast<Duration>(uniform01(rng) * static_cast<double>(hi - lo));
}

inline double exponential(Rng& rng, double mean) {
  // Inverse CDF; log1p(-u) is finite for u in [0, 1).
  return -mean * std::log1p(-uniform01(rng));
}

inline double gaussian(Rng& rng, double mean, double stdev) {
  // Box-Muller without state; consumes two uniforms per draw.
  double u1 = 1.0 - uniform01(rng);  // (0, 1]
  double u2 = uniform01(rng);
  double r = std::sqrt(-2.0 * std::log(u1));
  return mean + stdev * r * std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace streamsync

#endif  // STREAMSYNC_RNG_HPP_
