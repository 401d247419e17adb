#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace hyla {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Derives an independent seed for a named purpose from a master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) noexcept {
  return mix64(mix64(master) ^ mix64(tag * 0xD1B54A32D192ED03ULL));
}

/// Counter-based stream: the k-th draw is a pure function of (seed, k), so the
/// sampled values depend only on the documented draw order and never on the
/// platform's <random> distribution implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) noexcept : key_(mix64(seed)) {}

  std::uint64_t next_u64() noexcept { return mix64(key_ ^ mix64(counter_++)); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), n > 0; rejection keeps it unbiased.
  std::uint64_t below(std::uint64_t n) noexcept {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via Box-Muller; consumes exactly two uniforms per call.
  double normal() noexcept {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t position() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Tags for the independent streams derived from one master seed.
namespace seed_tag {
inline constexpr std::uint64_t kEmbeddings = 1;
inline constexpr std::uint64_t kConstants = 2;
inline constexpr std::uint64_t kSplits = 3;
inline constexpr std::uint64_t kWeights = 4;
}  // namespace seed_tag

}  // namespace hyla
