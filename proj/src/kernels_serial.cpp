#include "lsim/kernels.hpp"

namespace lsim::kernels {

void dense_serial(std::span<const std::int16_t> weights, std::span<const std::int16_t> bias,
                  std::span<const std::int16_t> input, std::span<std::int16_t> out) noexcept {
  const std::size_t in = input.size();
  for (std::size_t o = 0; o < out.size(); ++o) {
    std::int64_t acc = static_cast<std::int64_t>(bias[o]) * 256;
    const auto row = weights.subspan(o * in, in);
    for (std::size_t i = 0; i < in; ++i) {
      acc += static_cast<std::int32_t>(row[i]) * static_cast<std::int32_t>(input[i]);
    }
    out[o] = saturate16(round_shift_half_even(acc));
  }
}

unsigned __int128 sum_serial(std::span<const std::uint64_t> x) noexcept {
  unsigned __int128 s = 0;
  for (auto v : x) s += v;
  return s;
}

CentralSums central_sums_serial(std::span<const std::uint64_t> x, long double center) noexcept {
  CentralSums c;
  for (auto v : x) {
    const long double d = static_cast<long double>(v) - center;
    const long double d2 = d * d;
    c.s2 += d2;
    c.s3 += d2 * d;
    c.s4 += d2 * d2;
  }
  return c;
}

}  // namespace lsim::kernels
