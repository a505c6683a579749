#include <algorithm>
#include <vector>

#include "lsim/kernels.hpp"

namespace lsim::kernels {

void dense_parallel(std::span<const std::int16_t> weights, std::span<const std::int16_t> bias,
                    std::span<const std::int16_t> input, std::span<std::int16_t> out) noexcept {
  const auto in = static_cast<std::ptrdiff_t>(input.size());
  const auto rows = static_cast<std::ptrdiff_t>(out.size());
  const std::int16_t* w = weights.data();
  const std::int16_t* x = input.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t o = 0; o < rows; ++o) {
    std::int64_t acc = static_cast<std::int64_t>(bias[o]) * 256;
    const std::int16_t* row = w + o * in;
    for (std::ptrdiff_t i = 0; i < in; ++i) {
      acc += static_cast<std::int32_t>(row[i]) * static_cast<std::int32_t>(x[i]);
    }
    out[o] = saturate16(round_shift_half_even(acc));
  }
}

void dense(std::span<const std::int16_t> weights, std::span<const std::int16_t> bias,
           std::span<const std::int16_t> input, std::span<std::int16_t> out) noexcept {
  if (weights.size() >= kParallelMacThreshold) {
    dense_parallel(weights, bias, input, out);
  } else {
    dense_serial(weights, bias, input, out);
  }
}

unsigned __int128 sum_parallel(std::span<const std::uint64_t> x) noexcept {
  // Integer addition is associative, so any reduction order is exact.
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const std::uint64_t* p = x.data();
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
#pragma omp parallel
  {
    unsigned __int128 local = 0;
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < n; ++i) local += p[i];
#pragma omp critical
    {
      unsigned __int128 total = (static_cast<unsigned __int128>(hi) << 64) | lo;
      total += local;
      lo = static_cast<std::uint64_t>(total);
      hi = static_cast<std::uint64_t>(total >> 64);
    }
  }
  return (static_cast<unsigned __int128>(hi) << 64) | lo;
}

CentralSums central_sums_parallel(std::span<const std::uint64_t> x, long double center) noexcept {
  const std::size_t blocks = (x.size() + kMomentBlock - 1) / kMomentBlock;
  std::vector<CentralSums> partial(blocks);
  const auto nb = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kMomentBlock;
    const std::size_t len = std::min(kMomentBlock, x.size() - begin);
    partial[b] = central_sums_serial(x.subspan(begin, len), center);
  }
  CentralSums total;
  for (const auto& p : partial) {
    total.s2 += p.s2;
    total.s3 += p.s3;
    total.s4 += p.s4;
  }
  return total;
}

}  // namespace lsim::kernels
