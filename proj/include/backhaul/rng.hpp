#pragma once

#include <cstdint>
#include <random>

namespace backhaul {

using Rng = std::mt19937_64;

/// Derives an independent 64-bit seed for (master, index, stream) with a
/// splitmix64 finalizer, so per-trial streams do not depend on scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                    std::uint64_t stream = 0) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(master) ^ index) ^ (stream * 0xd1b54a32d192ed03ULL));
}

// Stream tags used when deriving per-trial seeds.
inline constexpr std::uint64_t kPlacementStream = 1;
inline constexpr std::uint64_t kChannelStream = 2;
inline constexpr std::uint64_t kRandomSchemeStream = 3;

}  // namespace backhaul
