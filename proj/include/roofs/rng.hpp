#pragma once

#include <cstdint>
#include <random>

namespace roofs {

/// Engine used everywhere randomness is drawn. Recorded in run metadata.
using Rng = std::mt19937_64;

inline constexpr const char* kRngIdentity = "mt19937_64/splitmix64-substreams";

/// SplitMix64 finalizer; spreads nearby seeds across the state space.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Independent engine for (seed, stream) so that adding draws to one stream
/// never shifts another.
inline Rng substream(std::uint64_t seed, std::uint64_t stream) {
  return Rng(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x5851F42D4C957F2DULL)));
}

}  // namespace roofs
