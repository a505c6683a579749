#pragma once

#include <cstdint>
#include <string_view>

namespace lsim {

/// SplitMix64 generator with named child streams.
///
/// A child stream is derived from the seed this generator was constructed
/// with, never from its current state, so drawing from one stream does not
/// perturb any sibling.
class Rng {
 public:
  explicit constexpr Rng(std::uint64_t seed = 0) noexcept : seed_(seed), state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound) via multiply-shift (bias < 2^-32 for
  /// bounds below 2^32).
  constexpr std::uint64_t below(std::uint64_t bound) noexcept {
    const auto hi = next() >> 32;
    return (hi * bound) >> 32;
  }

  /// Uniform integer in [lo, hi] (inclusive), hi - lo < 2^32.
  constexpr std::int64_t between(std::int64_t lo, std::int64_t hi) noexcept {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  constexpr Rng child(std::string_view name) const noexcept {
    return Rng(mix(seed_ ^ fnv1a(name)));
  }

  constexpr Rng child(std::string_view name, std::uint64_t index) const noexcept {
    return Rng(mix(mix(seed_ ^ fnv1a(name)) + 0x9E3779B97F4A7C15ULL * (index + 1)));
  }

  constexpr std::uint64_t seed() const noexcept { return seed_; }
  constexpr std::uint64_t state() const noexcept { return state_; }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace lsim
