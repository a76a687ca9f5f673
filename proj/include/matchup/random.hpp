#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace matchup {

/// SplitMix64 (Steele, Lea, Flood). The output sequence is fixed across
/// platforms, so shuffles are reproducible from the seed alone.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, bound) by rejection; bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    // Largest multiple of bound that fits in 2^64.
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % bound + 1) % bound;
    std::uint64_t x;
    do {
      x = next();
    } while (x > limit);
    return x % bound;
  }

private:
  std::uint64_t state_;
};

/// First output of a SplitMix64 generator seeded with `x`.
inline std::uint64_t splitmix64(std::uint64_t x) { return SplitMix64(x).next(); }

/// 64-bit FNV-1a over the bytes of `s`.
inline std::uint64_t stable_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

} // namespace matchup
