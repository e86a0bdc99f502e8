#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>

namespace rrw {

// SplitMix64 finaliser; used for seeding and for deriving sub-stream keys.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix_key(std::uint64_t a, std::uint64_t b) noexcept {
  return splitmix64(a ^ splitmix64(b + 0x632BE59BD9B4E019ULL));
}

/// xoshiro256** engine. Satisfies UniformRandomBitGenerator, so it plugs into
/// <random> distributions, but the samplers below avoid those so that output
/// is identical across standard library implementations.
class Engine {
 public:
  using result_type = std::uint64_t;

  explicit Engine(std::uint64_t seed = 0) noexcept { reseed(seed); }

  void reseed(std::uint64_t seed) noexcept {
    std::uint64_t x = seed;
    for (auto& s : state_) {
      x += 0x9E3779B97F4A7C15ULL;
      s = splitmix64(x);
    }
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Engine& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Index in [0, n) taken as floor(u * n) of a uniform draw u.
inline std::size_t index_from_uniform(double u, std::size_t n) noexcept {
  auto k = static_cast<std::size_t>(u * static_cast<double>(n));
  return k < n ? k : n - 1;
}

inline std::size_t uniform_index(Engine& rng, std::size_t n) noexcept {
  return index_from_uniform(uniform01(rng), n);
}

/// Independent engines for one coupled ensemble. Termination coins, movement
/// uniforms and block permutations come from separate engines, so two
/// coupling schemes run from the same key consume identical termination and
/// movement draws (common random numbers).
struct RngStream {
  Engine termination;
  Engine movement;
  Engine partition;

  explicit RngStream(std::uint64_t key = 0) noexcept
      : termination(mix_key(key, 1)),
        movement(mix_key(key, 2)),
        partition(mix_key(key, 3)) {}
};

/// Stream for the (trial, item) work unit under a master seed. Items are
/// start nodes for most estimators.
inline RngStream substream(std::uint64_t seed, std::uint64_t trial,
                           std::uint64_t item) noexcept {
  return RngStream(mix_key(mix_key(seed, trial), item));
}

/// Single engine for auxiliary per-trial randomness (test splits, start
/// node selection); `purpose` keeps it disjoint from the ensemble streams.
inline Engine auxiliary_engine(std::uint64_t seed, std::uint64_t trial,
                               std::uint64_t purpose) noexcept {
  return Engine(mix_key(mix_key(mix_key(seed, trial), ~purpose), 0xA0A0A0A0ULL));
}

}  // namespace rrw
