// SPDX-License-Identifier: Apache-2.0
//
// Counter-based random streams keyed by (seed, tree index, node path).
//
// Every vertex of a cascade tree owns an independent stream whose key is
// derived from its parent's key and its child slot. Two simulations of the
// same tree index therefore see identical clocks, splits and coin flips at
// every vertex they both visit, regardless of horizon, depth cap, mode, or
// the order in which vertices are expanded. Monotone couplings over t and
// n rely on this.
#pragma once

#include <cmath>
#include <cstdint>

namespace cascade {

/// SplitMix64 output function (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// Key of the root vertex of tree `tree_index` under `seed`.
constexpr std::uint64_t tree_key(std::uint64_t seed, std::uint64_t tree_index) {
  return mix64(mix64(seed ^ 0x5851F42D4C957F2DULL) + kGolden * (tree_index + 1));
}

/// Key of child `slot` (1 or 2) of the vertex with key `parent`.
constexpr std::uint64_t child_key(std::uint64_t parent, unsigned slot) {
  return mix64(parent + kGolden * (2 * static_cast<std::uint64_t>(slot) + 1)) ^ (parent >> 17);
}

/// Sequential SplitMix64 stream seeded by a key.
class RandomStream {
 public:
  explicit constexpr RandomStream(std::uint64_t key) : state_(key) {}

  constexpr std::uint64_t next_u64() {
    state_ += kGolden;
    return mix64(state_);
  }

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  /// Exponential with the given rate.
  double exponential(double rate) { return -std::log(uniform()) / rate; }

 private:
  std::uint64_t state_;
};

}  // namespace cascade
