#include "lsim/sim_time.hpp"

#include <string>

#include "lsim/errors.hpp"

namespace lsim {

namespace {

using u128 = unsigned __int128;

// Effective frequency scaled by 1e6: freq_hz * (1e6 + drift_ppm).
u128 scaled_frequency(const ClockDomain& c) {
  const std::int64_t factor = 1'000'000 + static_cast<std::int64_t>(c.drift_ppm);
  if (c.freq_hz == 0 || factor <= 0) {
    throw ConfigError("clock " + std::to_string(c.id) + ": effective frequency must be positive");
  }
  return static_cast<u128>(c.freq_hz) * static_cast<u128>(factor);
}

}  // namespace

void ClockDomain::validate() const { (void)scaled_frequency(*this); }

std::uint64_t cycles_to_time(std::uint64_t cycles, const ClockDomain& clock) {
  // ns = cycles * 1e9 * 1e6 / (freq * (1e6 + ppm)); round half up (all terms
  // are non-negative, so this is ties-away-from-zero).
  const u128 den = scaled_frequency(clock);
  const u128 num = static_cast<u128>(cycles) * 1'000'000'000ULL * 1'000'000ULL;
  return static_cast<std::uint64_t>((2 * num + den) / (2 * den));
}

std::uint64_t time_to_cycles_ceil(std::uint64_t ns, const ClockDomain& clock) {
  const u128 num = static_cast<u128>(ns) * scaled_frequency(clock);
  const u128 den = static_cast<u128>(1'000'000'000ULL) * 1'000'000ULL;
  return static_cast<std::uint64_t>((num + den - 1) / den);
}

}  // namespace lsim
