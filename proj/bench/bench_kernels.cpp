// Serial vs OpenMP kernels.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "lsim/kernels.hpp"
#include "lsim/rng.hpp"

namespace {

struct Layer {
  std::vector<std::int16_t> w, b, x, out;
};

Layer make_layer(std::size_t n) {
  lsim::Rng rng(1);
  Layer l{std::vector<std::int16_t>(n * n), std::vector<std::int16_t>(n), std::vector<std::int16_t>(n),
          std::vector<std::int16_t>(n)};
  for (auto& v : l.w) v = static_cast<std::int16_t>(rng.between(-256, 256));
  for (auto& v : l.b) v = static_cast<std::int16_t>(rng.between(-256, 256));
  for (auto& v : l.x) v = static_cast<std::int16_t>(rng.between(-256, 256));
  return l;
}

std::vector<std::uint64_t> make_samples(std::size_t n) {
  lsim::Rng rng(2);
  std::vector<std::uint64_t> x(n);
  for (auto& v : x) v = 40'000 + rng.below(60'000);
  return x;
}

template <auto Kernel>
void BM_dense(benchmark::State& state) {
  auto l = make_layer(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    Kernel(l.w, l.b, l.x, l.out);
    benchmark::DoNotOptimize(l.out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(l.w.size()));
}

template <auto Kernel>
void BM_sum(benchmark::State& state) {
  const auto x = make_samples(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto s = Kernel(x);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Kernel>
void BM_central_sums(benchmark::State& state) {
  const auto x = make_samples(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto s = Kernel(x, 70'000.0L);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_dense<lsim::kernels::dense_serial>)->Name("dense/serial")->RangeMultiplier(4)->Range(16, 1024);
BENCHMARK(BM_dense<lsim::kernels::dense_parallel>)->Name("dense/parallel")->RangeMultiplier(4)->Range(16, 1024);
BENCHMARK(BM_sum<lsim::kernels::sum_serial>)->Name("sum/serial")->Range(1 << 10, 1 << 20);
BENCHMARK(BM_sum<lsim::kernels::sum_parallel>)->Name("sum/parallel")->Range(1 << 10, 1 << 20);
BENCHMARK(BM_central_sums<lsim::kernels::central_sums_serial>)->Name("central_sums/serial")->Range(1 << 10, 1 << 20);
BENCHMARK(BM_central_sums<lsim::kernels::central_sums_parallel>)->Name("central_sums/parallel")->Range(1 << 10, 1 << 20);

BENCHMARK_MAIN();
