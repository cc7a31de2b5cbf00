#pragma once

#include <cstdint>
#include <random>

namespace mimic {

/// All sampling draws from MT19937-64 as specified by the C++ standard, so a
/// seed reproduces the same trace on every conforming implementation.
using RandomStream = std::mt19937_64;

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
inline double uniform01(RandomStream& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// SplitMix64 finalizer over `master + (index + 1) * golden`; seeds the
/// per-trial streams of Monte Carlo runs independently of worker count.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace mimic
