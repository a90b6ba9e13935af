// bench_main.cpp - microbenchmarks for the hot tensor kernels
#include <benchmark/benchmark.h>

#include "cogs/ops.hpp"
#include "cogs/rng.hpp"

namespace {

void BM_matmul(benchmark::State& state) {
    const auto n = state.range(0);
    cogs::Rng rng(1);
    auto a = cogs::Tensor::randn({n, n}, rng);
    auto b = cogs::Tensor::randn({n, n}, rng);
    for (auto _ : state) {
        auto c = cogs::matmul(a, b);
        benchmark::DoNotOptimize(c.values().data());
    }
    state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(BM_matmul)->Arg(32)->Arg(128)->Arg(256);

void BM_softmax(benchmark::State& state) {
    const auto n = state.range(0);
    cogs::Rng rng(2);
    auto a = cogs::Tensor::randn({n, n}, rng);
    for (auto _ : state) {
        auto y = cogs::softmax_lastdim(a);
        benchmark::DoNotOptimize(y.values().data());
    }
}
BENCHMARK(BM_softmax)->Arg(64)->Arg(512);

}  // namespace

BENCHMARK_MAIN();
