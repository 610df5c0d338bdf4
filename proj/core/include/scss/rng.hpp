#pragma once

#include <cstdint>
#include <random>

#include "scss/types.hpp"

namespace scss {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent, schedule-free streams.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for stream `index` under `master`. Any number of extra tags may be
/// folded in (grid point, experiment id) to keep streams disjoint.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                    std::uint64_t tag = 0) {
  return splitmix64(splitmix64(splitmix64(master) ^ index) ^ (tag * 0x2545f4914f6cdd1dULL));
}

inline Rng make_rng(std::uint64_t master, std::uint64_t index, std::uint64_t tag = 0) {
  return Rng(derive_seed(master, index, tag));
}

/// Standard circularly-symmetric complex normal, E|z|^2 = 1.
Complex complex_normal(Rng& rng);

/// Uniform integer in [0, n).
int uniform_index(Rng& rng, int n);

/// Uniform double in [0, 1).
double uniform01(Rng& rng);

}  // namespace scss
