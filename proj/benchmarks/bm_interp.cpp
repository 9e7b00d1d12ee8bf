#include <benchmark/benchmark.h>

#include <string>

#include "gsv/erase.hpp"
#include "gsv/parser.hpp"
#include "gsv/schedule.hpp"

namespace {

// Two threads handing a counter back and forth through a mutex-guarded cell.
const char* kPingPong = R"(
let c = cons(0) in
let m = new_mutex in
fork (
  while (acquire m; let v = [c] in ([c] := v + 1; release m; v < 512)) do skip
);
while (acquire m; let v = [c] in ([c] := v + 1; release m; v < 512)) do skip;
tt
)";

void bm_plain_run(benchmark::State& state) {
    gsv::Program p = gsv::parse_program(kPingPong);
    gsv::CmdPtr plain = gsv::erase_annotations(p.main);
    for (auto _ : state) {
        gsv::RoundRobinScheduler rr;
        gsv::RunOptions opts;
        auto res = gsv::run_plain(plain, rr, opts);
        benchmark::DoNotOptimize(res.steps);
    }
}

void bm_plain_run_traced(benchmark::State& state) {
    gsv::Program p = gsv::parse_program(kPingPong);
    gsv::CmdPtr plain = gsv::erase_annotations(p.main);
    for (auto _ : state) {
        gsv::RandomFairScheduler sched(7, 64);
        gsv::RunOptions opts;
        opts.record_trace = true;
        auto res = gsv::run_plain(plain, sched, opts);
        benchmark::DoNotOptimize(res.trace.size());
    }
}

} // namespace

BENCHMARK(bm_plain_run);
BENCHMARK(bm_plain_run_traced);
