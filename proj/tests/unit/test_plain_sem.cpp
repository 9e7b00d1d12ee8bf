#include <doctest.h>

#include <string>
#include <vector>

#include "gsv/parser.hpp"
#include "gsv/plain_sem.hpp"
#include "gsv/schedule.hpp"

using namespace gsv;

namespace {

PlainRunResult run_rr(const std::string& text, std::uint64_t max_steps = 100000,
                      bool trace = false) {
    Program p = parse_program(text);
    RoundRobinScheduler sched;
    RunOptions opts;
    opts.max_steps = max_steps;
    opts.record_trace = trace;
    return run_plain(p.main, sched, opts);
}

PlainRunResult run_random(const std::string& text, std::uint64_t seed,
                          std::uint64_t max_steps = 100000, bool trace = false) {
    Program p = parse_program(text);
    RandomFairScheduler sched(seed, 16);
    RunOptions opts;
    opts.max_steps = max_steps;
    opts.record_trace = trace;
    return run_plain(p.main, sched, opts);
}

const PlainCell* cell_at(const PlainMachine& m, std::uint64_t idx) {
    auto it = m.heap.find(HeapLoc{idx});
    return it == m.heap.end() ? nullptr : &it->second;
}

} // namespace

TEST_CASE("boot starts a single thread") {
    Program p = parse_program("tt");
    PlainMachine m = PlainMachine::boot(p.main);
    REQUIRE(m.threads.size() == 1);
    CHECK(m.threads.count(0) == 1);
    CHECK(m.fresh_tid() == 1);
}

TEST_CASE("a value thread terminates and leaves the pool") {
    auto r = run_rr("1 + 2");
    CHECK(r.status == RunStatus::Terminated);
    CHECK(r.machine.threads.empty());
    CHECK(r.steps == 1); // just the Term step
}

TEST_CASE("allocation, write, and read") {
    auto r = run_rr("let x = (cons(1)) in [x] := 2; [x]");
    CHECK(r.status == RunStatus::Terminated);
    const PlainCell* c = cell_at(r.machine, 0);
    REQUIRE(c != nullptr);
    CHECK(c->kind == PlainCell::Kind::Cell);
    CHECK(c->val == Value::integer(2));
}

TEST_CASE("a countdown loop terminates") {
    auto r = run_rr(
        "let c = (cons(3)) in "
        "while (let v = [c] in [c] := v - 1; !(v = 1)) do skip; [c]");
    CHECK(r.status == RunStatus::Terminated);
    const PlainCell* c = cell_at(r.machine, 0);
    REQUIRE(c != nullptr);
    CHECK(c->val == Value::integer(0));
}

TEST_CASE("list cells track size changes") {
    auto r = run_rr("let l = (cons(nil)) in [l] := append([l], 7); size([l])", 1000, true);
    CHECK(r.status == RunStatus::Terminated);
    const PlainCell* c = cell_at(r.machine, 0);
    REQUIRE(c != nullptr);
    REQUIRE(c->val.is_list());
    CHECK(c->val.as_list().size() == 1);

    bool saw_growth = false;
    for (const auto& s : r.trace)
        if (s.list_delta && *s.list_delta == 1) saw_growth = true;
    CHECK(saw_growth);
}

TEST_CASE("an if with a false condition produces unit") {
    auto r = run_rr("let x = (cons(0)) in if (1 = 2) then ([x] := 9); [x]");
    CHECK(r.status == RunStatus::Terminated);
    CHECK(cell_at(r.machine, 0)->val == Value::integer(0));
}

TEST_CASE("fork interleaves under round robin") {
    auto r = run_rr(
        "let c = (cons(0)) in "
        "fork ([c] := [c] + 1; tt); "
        "while (let v = [c] in v = 0) do skip; "
        "[c]",
        10000, true);
    CHECK(r.status == RunStatus::Terminated);
    CHECK(cell_at(r.machine, 0)->val == Value::integer(1));

    bool forked = false;
    for (const auto& s : r.trace)
        if (s.forked) {
            forked = true;
            CHECK(*s.forked == 1);
        }
    CHECK(forked);
}

TEST_CASE("thread ids are the smallest unused") {
    auto r = run_rr("fork (tt); fork (tt); tt", 100, true);
    CHECK(r.status == RunStatus::Terminated);
    std::vector<ThreadId> forked;
    for (const auto& s : r.trace)
        if (s.forked) forked.push_back(*s.forked);
    REQUIRE(forked.size() == 2);
    // Round robin lets the first child finish before the second fork, so the
    // id is reused.
    CHECK(forked[0] == 1);
    CHECK(forked[1] == 1);
}

TEST_CASE("mutexes serialize two incrementers") {
    std::string text =
        "let c = (cons(0)) in let m = (new_mutex) in "
        "fork (acquire m; [c] := [c] + 1; release m; tt); "
        "fork (acquire m; [c] := [c] + 1; release m; tt); "
        "while (let v = [c] in !(v = 2)) do skip; "
        "[c]";
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL}) {
        auto r = run_random(text, seed);
        CHECK(r.status == RunStatus::Terminated);
        CHECK(cell_at(r.machine, 0)->val == Value::integer(2));
    }
    auto rr = run_rr(text);
    CHECK(rr.status == RunStatus::Terminated);
    CHECK(cell_at(rr.machine, 0)->val == Value::integer(2));
}

TEST_CASE("re-acquiring a held mutex deadlocks a single thread") {
    auto r = run_rr("let m = (new_mutex) in acquire m; acquire m; tt");
    CHECK(r.status == RunStatus::Stuck);
    REQUIRE(r.stuck.has_value());
    CHECK(r.stuck->reason.find("blocked") != std::string::npos);
}

TEST_CASE("blocked threads wait and resume") {
    auto r = run_rr(
        "let c = (cons(0)) in let m = (new_mutex) in "
        "acquire m; "
        "fork (acquire m; [c] := 5; release m; tt); "
        "[c] := 1; release m; "
        "while (let v = [c] in !(v = 5)) do skip; tt",
        10000, true);
    CHECK(r.status == RunStatus::Terminated);
    CHECK(cell_at(r.machine, 0)->val == Value::integer(5));

    bool saw_blocked = false;
    for (const auto& s : r.trace)
        for (ThreadId b : s.blocked)
            if (b == 1) saw_blocked = true;
    CHECK(saw_blocked);
}

TEST_CASE("releasing an unheld mutex is stuck") {
    auto r = run_rr("let m = (new_mutex) in release m; tt");
    CHECK(r.status == RunStatus::Stuck);
    REQUIRE(r.stuck.has_value());
    CHECK(r.stuck->tid == 0);
}

TEST_CASE("acquiring a plain cell is stuck") {
    auto r = run_rr("let x = (cons(1)) in acquire x; tt");
    CHECK(r.status == RunStatus::Stuck);
}

TEST_CASE("an undefined expression is stuck") {
    auto r = run_rr("tail(nil)");
    CHECK(r.status == RunStatus::Stuck);
    REQUIRE(r.stuck.has_value());
    CHECK(r.stuck->reason.find("does not evaluate") != std::string::npos);
}

TEST_CASE("ghost commands cannot run in the plain semantics") {
    auto r = run_rr("ghost set_signal 0; tt");
    CHECK(r.status == RunStatus::Stuck);
    REQUIRE(r.stuck.has_value());
    CHECK(r.stuck->reason.find("annotated") != std::string::npos);
}

TEST_CASE("a spinning loop exhausts the step budget") {
    auto r = run_rr("while (true) do skip", 200);
    CHECK(r.status == RunStatus::Budget);
    CHECK(r.steps == 200);
}

TEST_CASE("heap digests distinguish heaps") {
    auto r1 = run_rr("cons(1); tt", 100, true);
    auto r2 = run_rr("cons(2); tt", 100, true);
    REQUIRE(!r1.trace.empty());
    REQUIRE(!r2.trace.empty());
    CHECK(r1.trace.back().heap_digest != r2.trace.back().heap_digest);
    CHECK(plain_heap_digest(r1.machine.heap) == r1.trace.back().heap_digest);
}

TEST_CASE("round robin is fair and the audit sees it") {
    // Three spinning threads: each waits exactly two steps between turns.
    auto r = run_rr(
        "fork (while (true) do skip); fork (while (true) do skip); while (true) do skip", 300,
        true);
    CHECK(r.status == RunStatus::Budget);
    auto good = fairness_audit(r.trace, 2);
    CHECK(good.ok);
    auto tight = fairness_audit(r.trace, 1);
    CHECK_FALSE(tight.ok);
    CHECK(tight.worst_streak == 2);
}

TEST_CASE("the random scheduler window bounds starvation") {
    auto r = run_random("fork (while (true) do skip); while (true) do skip", 7, 500, true);
    CHECK(r.status == RunStatus::Budget);
    auto report = fairness_audit(r.trace, 16);
    CHECK(report.ok);
}

TEST_CASE("random runs agree with round robin on a racy counter") {
    std::string text =
        "let c = (cons(0)) in let m = (new_mutex) in "
        "fork (acquire m; [c] := [c] + 10; release m; tt); "
        "acquire m; [c] := [c] + 3; release m; "
        "while (let v = [c] in !(v = 13)) do skip; [c]";
    auto rr = run_rr(text);
    CHECK(rr.status == RunStatus::Terminated);
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        auto r = run_random(text, seed);
        CHECK(r.status == RunStatus::Terminated);
        CHECK(cell_at(r.machine, 0)->val == Value::integer(13));
    }
}
