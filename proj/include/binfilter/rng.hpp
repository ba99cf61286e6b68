#pragma once

#include <cstdint>
#include <random>

namespace binfilter {

using Rng = std::mt19937_64;

// Uniform on [0,1) with 53 random bits; independent of libstdc++'s
// distribution implementations so sequences are stable across toolchains.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Purpose tags separating the random streams of one replication.
enum class StreamPurpose : std::uint64_t {
  kTruth = 1,
  kObservation = 2,
  kForecastProposed = 3,
  kUpdateProposed = 4,
  kForecastAssumed = 5,
  kResampleAssumed = 6,
  kOracleSuite = 7,
  kTest = 8,
};

// Stream keyed by (master seed, replication, time step, purpose). Streams for
// different keys are statistically independent and order-insensitive.
inline Rng make_stream(std::uint64_t seed, std::uint64_t replication,
                       std::uint64_t time_step, StreamPurpose purpose) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ replication);
  h = splitmix64(h ^ (time_step * 0x100000001b3ULL));
  h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
  std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                    static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(replication)};
  return Rng(seq);
}

}  // namespace binfilter
