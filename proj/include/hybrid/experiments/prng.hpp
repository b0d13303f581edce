#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace hybrid::experiments {

/// xoshiro256** generator seeded by expanding a 64-bit seed with splitmix64.
///
/// Stream order: `next_u64` advances the state once. `uniform` consumes one
/// u64 and keeps its top 53 bits. `normal` uses the polar Box-Muller method:
/// it draws pairs of uniforms mapped to (-1, 1) until they fall strictly inside
/// the unit circle, returns the first deviate of the accepted pair and caches
/// the second for the next call.
class Prng {
 public:
  explicit Prng(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform on [0, 1).
  double uniform();
  /// Standard normal deviate.
  double normal();
  /// Uniform integer in [0, n), by rejection to avoid modulo bias.
  std::uint64_t below(std::uint64_t n);
  /// Fisher-Yates permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// splitmix64 step, exposed for seeding sub-streams.
std::uint64_t splitmix64(std::uint64_t& state);

inline Prng prng_new(std::uint64_t seed) { return Prng(seed); }
inline double prng_normal(Prng& gen) { return gen.normal(); }

}  // namespace hybrid::experiments
