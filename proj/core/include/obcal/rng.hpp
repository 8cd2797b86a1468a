#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace obcal {

/// Counter-derived random stream (xoshiro256++ seeded through splitmix64).
///
/// A stream's identity is the triple (seed, hi, lo). Distinct triples give
/// statistically independent streams, so a simulation replication can derive
/// its own stream from (seed, population_index, allocation_index) and produce
/// the same draws under any worker schedule.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::uint64_t hi = 0, std::uint64_t lo = 0) {
    std::uint64_t key = seed;
    key = mix(key) ^ mix(hi + 0x9e3779b97f4a7c15ULL);
    key = mix(key) ^ mix(lo + 0xbf58476d1ce4e5b9ULL);
    for (auto& word : state_) {
      key += 0x9e3779b97f4a7c15ULL;
      word = mix(key);
    }
    // splitmix expansion cannot yield the all-zero state, but keep the guard.
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform integer in {0, ..., bound-1}; bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    std::uint64_t draw;
    do {
      draw = (*this)();
    } while (draw < threshold);
    return draw % bound;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::array<std::uint64_t, 4> state_;
};

}  // namespace obcal
