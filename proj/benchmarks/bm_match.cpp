#include <benchmark/benchmark.h>

#include "gsv/models.hpp"

namespace {

using namespace gsv;

AArg loc_arg(std::uint64_t i) { return AArg::of(Expr::lit(Value::loc(HeapLoc{i}))); }

void bm_carve_chunks(benchmark::State& state) {
    LogHeap h;
    for (std::uint64_t i = 0; i < 16; ++i) {
        lh_add(h, LogResource::points_to(HeapLoc{i}, Value::integer(static_cast<std::int64_t>(i))),
               Rational(1));
    }
    lh_add(h, LogResource::obs_res({}), Rational(1));

    std::vector<AssertionPtr> parts = {
        Assertion::points_to(loc_arg(3), AArg::of(Expr::lit(Value::integer(3)))),
        Assertion::points_to(loc_arg(7), AArg::wildcard(), Fraction(1, 2)),
        Assertion::points_to(loc_arg(11), AArg::wildcard()),
        Assertion::obs_of({}),
    };
    AssertionPtr a = Assertion::star_all(parts);

    for (auto _ : state) {
        std::string why;
        benchmark::DoNotOptimize(carve(h, a, &why));
    }
}

void bm_carve_backtracking(benchmark::State& state) {
    LogHeap h;
    for (std::uint64_t i = 0; i < 8; ++i) {
        lh_add(h, LogResource::signal_res(i, i, i % 2 == 0), Rational(1));
    }
    // All-wildcard signal atoms force the matcher through its choice points.
    std::vector<AssertionPtr> parts;
    for (int k = 0; k < 4; ++k) {
        parts.push_back(
            Assertion::signal_part(AArg::wildcard(), AArg::wildcard(), AArg::wildcard()));
    }
    AssertionPtr a = Assertion::star_all(parts);

    for (auto _ : state) {
        std::string why;
        benchmark::DoNotOptimize(carve(h, a, &why));
    }
}

} // namespace

BENCHMARK(bm_carve_chunks);
BENCHMARK(bm_carve_backtracking);
