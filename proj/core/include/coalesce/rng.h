// Counter-based random streams for reproducible parallel trials.
//
// Every stream is a splitmix64 counter: the state advances by a fixed
// increment per draw and the output is a bijective mix of the counter.
// Stream seeds are derived, not sampled, so stream(master, tag, index)
// is a pure function and trial results never depend on scheduling.

#pragma once

#include <cstdint>

namespace coalesce::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// splitmix64 finalizer (Steele, Lea, Flood / Stafford mix13).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

// Domain tags separating the initial-state stream from per-trial streams.
inline constexpr std::uint64_t kTagInit = 0x696e69742d303031ull;
inline constexpr std::uint64_t kTagTrial = 0x747269616c2d3030ull;
inline constexpr std::uint64_t kTagSweep = 0x73776565702d3030ull;

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag,
                                    std::uint64_t index) {
  return mix64(mix64(mix64(master) ^ tag) + index * kGolden);
}

class Stream {
 public:
  explicit constexpr Stream(std::uint64_t seed) : state_(seed) {}

  constexpr std::uint64_t next_u64() {
    state_ += kGolden;
    return mix64(state_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Multiply-shift; bias is O(n / 2^64).
  std::uint64_t next_below(std::uint64_t n) {
    const unsigned __int128 wide = static_cast<unsigned __int128>(next_u64()) * n;
    return static_cast<std::uint64_t>(wide >> 64);
  }

  bool next_bernoulli(double p) { return next_u01() < p; }

  double next_uniform(double lo, double hi) { return lo + next_u01() * (hi - lo); }

 private:
  std::uint64_t state_;
};

inline Stream trial_stream(std::uint64_t master_seed, std::uint64_t trial_index) {
  return Stream(derive_seed(master_seed, kTagTrial, trial_index));
}

inline Stream init_stream(std::uint64_t master_seed) {
  return Stream(derive_seed(master_seed, kTagInit, 0));
}

}  // namespace coalesce::rng
