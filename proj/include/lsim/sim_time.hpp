#pragma once

#include <compare>
#include <cstdint>

namespace lsim {

/// Nanoseconds since simulation start.
struct SimTime {
  std::uint64_t ns = 0;

  friend constexpr auto operator<=>(SimTime, SimTime) = default;
  friend constexpr SimTime operator+(SimTime t, std::uint64_t d) { return SimTime{t.ns + d}; }
};

struct ClockDomain {
  std::uint32_t id = 0;
  std::uint64_t freq_hz = 1;
  std::int32_t drift_ppm = 0;

  /// Throws ConfigError unless the effective frequency is positive.
  void validate() const;

  friend bool operator==(const ClockDomain&, const ClockDomain&) = default;
};

/// round_nearest(cycles * 1e9 / (freq_hz * (1 + drift_ppm / 1e6))), ties away
/// from zero, evaluated in exact integer arithmetic.
std::uint64_t cycles_to_time(std::uint64_t cycles, const ClockDomain& clock);

/// Smallest cycle count whose duration covers `ns` (used to express a stall
/// in clock edges).
std::uint64_t time_to_cycles_ceil(std::uint64_t ns, const ClockDomain& clock);

}  // namespace lsim
