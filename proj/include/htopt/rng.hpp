#pragma once

#include <cstdint>

namespace htopt {

// 64-bit finalizer with full avalanche (SplitMix64 tail).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// Counter-based splittable random stream.  A stream is just a 64-bit key;
// draws are pure functions of (key, counter) and child streams fold extra
// words into the key.  No mutable state is shared between trajectories,
// steps, or coordinates, which keeps every run reproducible and every
// parallel schedule byte-identical.
struct RngStream {
  std::uint64_t key = 0;

  static RngStream from_seed(std::uint64_t seed) { return RngStream{mix64(seed + kGolden)}; }

  RngStream child(std::uint64_t word) const { return RngStream{mix64(key ^ mix64(word + kGolden))}; }

  std::uint64_t bits(std::uint64_t counter) const { return mix64(key + (counter + 1) * kGolden); }

  // Uniform on [0, 1).
  double uniform01(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1]; safe as a Pareto inversion input.
  double uniform_pos(std::uint64_t counter) const {
    return static_cast<double>((bits(counter) >> 11) + 1) * 0x1.0p-53;
  }
};

}  // namespace htopt
