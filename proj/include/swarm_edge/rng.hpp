#pragma once

#include <cstdint>
#include <random>

namespace swarm_edge {

using Rng = std::mt19937_64;

// Named stream families. Every stream in a run is derived from the master
// seed, a family tag and an index, so adding or reordering consumers in one
// family never shifts the draws seen by another.
enum class Stream : std::uint64_t {
  kInit = 1,
  kWorkerCoef = 2,
  kWorkerBatch = 3,
  kFading = 4,
  kChannelNoise = 5,
  kAdversary = 6,
  kData = 7,
  kPartition = 8,
  kGlobalData = 9,
  kRepetition = 10,
};

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream family,
                                    std::uint64_t index = 0) {
  return mix64(mix64(seed ^ mix64(static_cast<std::uint64_t>(family))) + index);
}

inline Rng make_rng(std::uint64_t seed, Stream family, std::uint64_t index = 0) {
  return Rng(derive_seed(seed, family, index));
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double standard_normal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace swarm_edge
