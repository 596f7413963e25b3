#pragma once

#include <cstdint>

namespace radiant {

// Counter-based stream: the k-th draw of a stream is a pure function of
// (seed, stream, k), so results never depend on evaluation order.

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept {
  return splitmix64(a ^ splitmix64(b + 0x632BE59BD9B4E019ull));
}

/// Uniform double in [0, 1) from the top 53 bits.
inline constexpr double to_unit_double(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : key_(hash_combine(seed, stream)) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
    return hash_combine(key_, counter);
  }

  constexpr double uniform(std::uint64_t counter) const noexcept {
    return to_unit_double(bits(counter));
  }

  /// Index in [0, n) via multiply-shift (Lemire); n must be > 0.
  std::uint64_t index(std::uint64_t counter, std::uint64_t n) const noexcept {
    const unsigned __int128 product = static_cast<unsigned __int128>(bits(counter)) * n;
    return static_cast<std::uint64_t>(product >> 64);
  }

 private:
  std::uint64_t key_;
};

/// Sequential convenience wrapper over a counter stream.
class SequentialRng {
 public:
  explicit SequentialRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept : rng_(seed, stream) {}

  double uniform() noexcept { return rng_.uniform(counter_++); }
  std::uint64_t index(std::uint64_t n) noexcept { return rng_.index(counter_++, n); }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

 private:
  CounterRng rng_;
  std::uint64_t counter_ = 0;
};

/// Seed for sub-task `index` of a run seeded with `base`.
inline constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
  return hash_combine(base ^ 0xA0761D6478BD642Full, index);
}

}  // namespace radiant
