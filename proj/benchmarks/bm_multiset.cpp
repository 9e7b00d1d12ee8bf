#include <benchmark/benchmark.h>

#include <cstdint>

#include "gsv/bag.hpp"

namespace {

using gsv::Bag;

Bag<std::uint64_t> ramp(std::uint64_t upto, std::uint64_t mult) {
    Bag<std::uint64_t> b;
    for (std::uint64_t v = 0; v < upto; ++v) b.add(v, mult);
    return b;
}

void bm_dm_less_descent(benchmark::State& state) {
    const auto n = static_cast<std::uint64_t>(state.range(0));
    auto lt = [](const std::uint64_t& a, const std::uint64_t& b) { return a < b; };
    Bag<std::uint64_t> big;
    big.add(n, 1);
    Bag<std::uint64_t> small = ramp(n, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(gsv::dm_less(small, big, lt));
    }
}

void bm_dm_less_incomparable(benchmark::State& state) {
    const auto n = static_cast<std::uint64_t>(state.range(0));
    auto lt = [](const std::uint64_t& a, const std::uint64_t& b) { return a < b; };
    Bag<std::uint64_t> a = ramp(n, 2);
    Bag<std::uint64_t> b = ramp(n, 2);
    a.add(n + 1, 1);
    b.add(n + 2, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(gsv::dm_less(a, b, lt));
    }
}

} // namespace

BENCHMARK(bm_dm_less_descent)->Arg(2)->Arg(4)->Arg(6);
BENCHMARK(bm_dm_less_incomparable)->Arg(2)->Arg(4)->Arg(6);
