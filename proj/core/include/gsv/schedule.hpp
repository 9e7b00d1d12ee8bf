#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gsv/plain_sem.hpp"

namespace gsv {

// One executed machine step, shared by the plain and annotated runners.
struct TraceStep {
    std::uint64_t index = 0;
    ThreadId tid = 0;
    std::string rule;
    std::optional<ThreadId> forked;
    std::optional<std::pair<std::int64_t, std::int64_t>> wait_signal; // (id, level)
    std::optional<SignalId> set_signal;
    std::optional<HeapLoc> touched;
    std::optional<std::int64_t> list_delta;
    std::vector<ThreadId> blocked; // threads that could not run at this step
    std::string heap_digest;
    CmdPtr cmd_before; // annotated runs: the thread's command before stepping
};

// Picks which enabled thread runs next. `enabled` is sorted and non-empty.
class Scheduler {
public:
    virtual ~Scheduler() = default;
    virtual ThreadId pick(const std::vector<ThreadId>& enabled, std::uint64_t step) = 0;
};

class RoundRobinScheduler : public Scheduler {
public:
    ThreadId pick(const std::vector<ThreadId>& enabled, std::uint64_t step) override;

private:
    std::optional<ThreadId> last_;
};

// Uniformly random among enabled threads, except that a thread left unrun
// for `window` steps while enabled is forced to run, which keeps every
// infinite schedule prefix fair in practice.
class RandomFairScheduler : public Scheduler {
public:
    RandomFairScheduler(std::uint64_t seed, std::uint64_t window)
        : rng_(seed), window_(window) {}

    ThreadId pick(const std::vector<ThreadId>& enabled, std::uint64_t step) override;

private:
    std::mt19937_64 rng_;
    std::uint64_t window_;
    std::map<ThreadId, std::uint64_t> last_run_;
};

struct RunOptions {
    std::uint64_t max_steps = 1'000'000;
    bool record_trace = false;
};

enum class RunStatus { Terminated, Stuck, Budget };

struct StuckReport {
    ThreadId tid = 0;
    std::uint64_t step = 0;
    std::string reason;
};

struct PlainRunResult {
    RunStatus status = RunStatus::Terminated;
    std::optional<StuckReport> stuck;
    std::uint64_t steps = 0;
    std::vector<TraceStep> trace;
    PlainMachine machine;
};

PlainRunResult run_plain(const CmdPtr& program, Scheduler& sched, const RunOptions& opts);

// Longest stretch of steps a thread spent runnable but unscheduled.
struct FairnessReport {
    bool ok = true;
    ThreadId worst_tid = 0;
    std::uint64_t worst_streak = 0;
};

FairnessReport fairness_audit(const std::vector<TraceStep>& trace, std::uint64_t bound);

} // namespace gsv
