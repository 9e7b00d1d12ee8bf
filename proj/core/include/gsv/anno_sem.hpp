#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gsv/logheap.hpp"
#include "gsv/plain_sem.hpp"
#include "gsv/schedule.hpp"

namespace gsv {

// Heap cell of the annotated machine. An unlocked mutex stores the logical
// resources its invariant protects; a locked one remembers what fraction of
// the mutex chunk the holder spent to get in.
struct AnnoCell {
    enum class Kind { Cell, Uninit, Unlocked, Locked };

    Kind kind = Kind::Cell;
    Value val;            // Cell
    Level level = 0;      // Unlocked / Locked
    std::string inv_name; // Unlocked / Locked
    AssertionPtr inv;     // Unlocked / Locked (closed)
    LogHeap prot;         // Unlocked: resources held by the invariant
    Fraction consumed;    // Locked: fraction spent by the holder
};

struct SigState {
    bool initialized = false;
    Level level = 0;
    bool set = false;
};

struct AnnoThread {
    CmdPtr cmd;
    LogHeap local;
    // Recorded by the await gate inside the critical section; consumed by the
    // loop unroll that performs the wait it justifies.
    std::optional<std::pair<std::int64_t, std::int64_t>> pending_wait;
    std::uint64_t ghost_streak = 0; // consecutive stutter steps
};

struct AnnoMachine {
    std::map<HeapLoc, AnnoCell> heap;
    std::map<SignalId, SigState> signals;
    std::map<ThreadId, AnnoThread> threads; // running threads only
    std::vector<LogHeap> retired;           // locals left by finished threads
    std::map<ThreadId, std::uint64_t> sig_counters; // persist across tid reuse
    std::uint64_t next_loc = 0;
    PlainMachine shadow; // the erased program, stepped in lockstep

    static AnnoMachine boot(const CmdPtr& main);
    ThreadId fresh_tid() const;
    HeapLoc fresh_loc() { return HeapLoc{next_loc++}; }
    // Deterministic per-thread id space: thread t's n-th signal is t*10^6+n.
    SignalId fresh_signal(ThreadId tid);

    // Positive points-to fractions in `local` back ghost dereferences.
    DerefFn ghost_reader(ThreadId tid) const;
};

enum class AnnoMode { Verify, Explore };

struct AnnoOptions {
    std::uint64_t max_steps = 1'000'000;
    std::uint64_t ghost_budget = 64; // consecutive stutter steps per thread
    bool record_trace = false;
    AnnoMode mode = AnnoMode::Verify;
    bool check_every_step = true;
};

struct ObligationLeak {
    ThreadId tid = 0;
    std::uint64_t step = 0;
    ObligationBag bag;
};

struct AnnoRunResult {
    RunStatus status = RunStatus::Terminated;
    std::optional<StuckReport> stuck;
    std::uint64_t steps = 0;
    std::vector<TraceStep> trace;
    AnnoMachine machine;
    std::vector<ObligationLeak> leaks; // explore mode only
};

AnnoRunResult run_annotated(const CmdPtr& main, Scheduler& sched, const AnnoOptions& opts);

// Structural checks tying logical state to machine state; empty string means
// everything holds. Exposed for tests.
std::string anno_invariant_violation(const AnnoMachine& m);

} // namespace gsv
