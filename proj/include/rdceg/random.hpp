#pragma once

#include <cstdint>
#include <random>

namespace rdceg {

using Rng = std::mt19937_64;

// Seed for stream `stream` of a run seeded with `seed` (splitmix64 finalizer over both words).
inline auto derive_seed(std::uint64_t seed, std::uint64_t stream) -> std::uint64_t {
  auto z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline auto make_stream(std::uint64_t seed, std::uint64_t stream) -> Rng {
  return Rng{derive_seed(seed, stream)};
}

}  // namespace rdceg
