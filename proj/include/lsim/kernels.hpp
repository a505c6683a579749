#pragma once

// Data-parallel inner loops. Each kernel has a plain serial reference and an
// OpenMP variant; tests hold the two to bit-identical (integer kernels) or
// 1e-12 relative (floating reductions) agreement, and bench/ compares speed.

#include <cstddef>
#include <cstdint>
#include <span>

namespace lsim::kernels {

/// Shift right by 8 with round-half-to-even.
constexpr std::int64_t round_shift_half_even(std::int64_t acc) noexcept {
  std::int64_t q = acc >> 8;  // floor
  const std::int64_t r = acc & 0xFF;
  if (r > 0x80 || (r == 0x80 && (q & 1) != 0)) ++q;
  return q;
}

constexpr std::int16_t saturate16(std::int64_t v) noexcept {
  if (v > 32767) return 32767;
  if (v < -32768) return -32768;
  return static_cast<std::int16_t>(v);
}

/// One fully connected Q7.8 layer without activation:
///   out[o] = sat16(round_half_even((sum_i w[o][i]*x[i] + (bias[o] << 8)) >> 8))
/// `weights` is out x in, row-major.
void dense_serial(std::span<const std::int16_t> weights, std::span<const std::int16_t> bias,
                  std::span<const std::int16_t> input, std::span<std::int16_t> out) noexcept;

/// OpenMP variant of dense_serial, parallel over output rows. Bit-identical.
void dense_parallel(std::span<const std::int16_t> weights, std::span<const std::int16_t> bias,
                    std::span<const std::int16_t> input, std::span<std::int16_t> out) noexcept;

/// Picks the parallel kernel once the layer is large enough to amortise the
/// thread team.
void dense(std::span<const std::int16_t> weights, std::span<const std::int16_t> bias,
           std::span<const std::int16_t> input, std::span<std::int16_t> out) noexcept;

inline constexpr std::size_t kParallelMacThreshold = std::size_t{1} << 15;

/// Exact sum of unsigned 64-bit samples.
unsigned __int128 sum_serial(std::span<const std::uint64_t> x) noexcept;
unsigned __int128 sum_parallel(std::span<const std::uint64_t> x) noexcept;

/// Sums of (x - center)^k for k = 2, 3, 4.
struct CentralSums {
  long double s2 = 0;
  long double s3 = 0;
  long double s4 = 0;
};

CentralSums central_sums_serial(std::span<const std::uint64_t> x, long double center) noexcept;

/// Blocked OpenMP reduction. Blocks have a fixed size and partials are
/// combined in block order, so the result does not depend on thread count.
CentralSums central_sums_parallel(std::span<const std::uint64_t> x, long double center) noexcept;

inline constexpr std::size_t kMomentBlock = 4096;

}  // namespace lsim::kernels
