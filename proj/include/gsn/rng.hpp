#pragma once

#include <array>
#include <cstdint>

namespace gsn {

/// Seeded pseudo-random stream: xoshiro256** (Blackman & Vigna) with the
/// state expanded from (seed, stream) by splitmix64.
///
/// Constants, so that streams can be reproduced outside this library:
///  - splitmix64: increment 0x9E3779B97F4A7C15, multipliers
///    0xBF58476D1CE4E5B9 and 0x94D049BB133111EB, shifts 30/27/31.
///  - seeding: splitmix64 state = seed ^ (stream * 0xD1B54A32D192ED03),
///    four successive outputs fill s[0..3].
///  - xoshiro256**: result = rotl(s1 * 5, 7) * 9; t = s1 << 17; rotations 45.
///  - uniform(): (next() >> 11) * 2^-53, in [0, 1).
///  - normal(): Marsaglia polar method on 2u-1 pairs, spare value cached.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  double uniform();
  double normal();
  bool bernoulli(double p) { return uniform() < p; }
  /// Uniform integer in [0, n), unbiased (rejection on the top range).
  std::uint64_t below(std::uint64_t n);

  /// Independent child stream; does not advance this generator.
  Rng split(std::uint64_t stream_id) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::array<std::uint64_t, 4> s_{};
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace gsn
