#pragma once

// Deterministic random streams for synthesis and experiments.
//
// xoshiro256++ seeded through splitmix64, with Marsaglia's polar method for
// normals. Self-contained so that identical seeds reproduce identical draws
// on any platform, independent of the standard library's distributions.

#include <array>
#include <cstdint>

namespace ocs {

/// One splitmix64 step; also used to derive substream seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// Seed for the substream identified by `key` within a base seed.
/// Used by the harness as derive_seed(derive_seed(base, n_index), trial).
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t key);

class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal draw (polar method; caches the paired deviate).
  double normal();

 private:
  std::array<std::uint64_t, 4> s_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace ocs
