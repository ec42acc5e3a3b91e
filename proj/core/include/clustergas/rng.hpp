#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace clustergas {

/// SplitMix64 step; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed for stream `index` under a base seed. Streams with different indices
/// (or different tags) are statistically independent.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index, std::uint64_t tag = 0) {
  std::uint64_t s = base ^ (0xD1B54A32D192ED03ULL * (tag + 1));
  splitmix64(s);
  s ^= 0x8CB92BA72F3D8DD7ULL * (index + 1);
  return splitmix64(s);
}

/// xoshiro256** generator. Bit-identical across platforms, unlike the
/// std:: distributions, which matters for the determinism contract.
class Rng {
public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) w = splitmix64(s);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
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

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on {0, ..., n-1}.
  std::uint64_t below(std::uint64_t n) {
    // Lemire's multiply-shift; the tiny bias is irrelevant at these n.
    return static_cast<std::uint64_t>((static_cast<uint128>((*this)()) * n) >> 64);
  }

  /// Standard normal via Box-Muller (no caching, so streams stay simple).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

private:
  __extension__ typedef unsigned __int128 uint128;

  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> state_{};
};

}  // namespace clustergas
