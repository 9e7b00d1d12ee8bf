#include "gsv/schedule.hpp"

#include <algorithm>
#include <set>

namespace gsv {

ThreadId RoundRobinScheduler::pick(const std::vector<ThreadId>& enabled, std::uint64_t) {
    ThreadId chosen = enabled.front();
    if (last_) {
        for (ThreadId t : enabled) {
            if (t > *last_) {
                chosen = t;
                break;
            }
        }
    }
    last_ = chosen;
    return chosen;
}

ThreadId RandomFairScheduler::pick(const std::vector<ThreadId>& enabled, std::uint64_t step) {
    ThreadId chosen = enabled.front();
    bool forced = false;
    std::uint64_t oldest = step + 1;
    for (ThreadId t : enabled) {
        std::uint64_t seen = last_run_.count(t) ? last_run_[t] : 0;
        if (step >= seen + window_ && seen < oldest) {
            oldest = seen;
            chosen = t;
            forced = true;
        }
    }
    if (!forced) {
        std::uniform_int_distribution<std::size_t> d(0, enabled.size() - 1);
        chosen = enabled[d(rng_)];
    }
    last_run_[chosen] = step;
    return chosen;
}

PlainRunResult run_plain(const CmdPtr& program, Scheduler& sched, const RunOptions& opts) {
    PlainRunResult res;
    res.machine = PlainMachine::boot(program);
    PlainMachine& m = res.machine;

    for (std::uint64_t step = 0; step < opts.max_steps; ++step) {
        if (m.threads.empty()) {
            res.status = RunStatus::Terminated;
            res.steps = step;
            return res;
        }
        std::vector<ThreadId> enabled, blocked_now;
        for (const auto& [tid, _] : m.threads) {
            (plain_blocked(m, tid) ? blocked_now : enabled).push_back(tid);
        }
        if (enabled.empty()) {
            res.status = RunStatus::Stuck;
            res.steps = step;
            res.stuck = StuckReport{blocked_now.front(), step, "all threads are blocked"};
            return res;
        }
        ThreadId tid = sched.pick(enabled, step);
        PlainStep ps = tp_step(m, tid);
        if (ps.status == PlainStep::Status::Blocked) {
            // The probe said this thread could run; a block here is a bug.
            res.status = RunStatus::Stuck;
            res.steps = step;
            res.stuck = StuckReport{tid, step, "scheduler picked a blocked thread"};
            return res;
        }
        if (ps.status == PlainStep::Status::Stuck) {
            res.status = RunStatus::Stuck;
            res.steps = step;
            res.stuck = StuckReport{tid, step, ps.reason};
            return res;
        }
        if (opts.record_trace) {
            TraceStep ts;
            ts.index = step;
            ts.tid = tid;
            ts.rule = ps.rule;
            ts.forked = ps.forked;
            ts.touched = ps.touched;
            ts.list_delta = ps.list_delta;
            ts.blocked = blocked_now;
            ts.heap_digest = plain_heap_digest(m.heap);
            res.trace.push_back(std::move(ts));
        }
        res.steps = step + 1;
    }
    res.status = RunStatus::Budget;
    return res;
}

FairnessReport fairness_audit(const std::vector<TraceStep>& trace, std::uint64_t bound) {
    FairnessReport rep;
    std::set<ThreadId> running{0};
    std::map<ThreadId, std::uint64_t> streak;
    for (const auto& ts : trace) {
        std::set<ThreadId> blocked(ts.blocked.begin(), ts.blocked.end());
        for (ThreadId t : running) {
            if (t == ts.tid) {
                streak[t] = 0;
                continue;
            }
            if (blocked.count(t)) continue; // not runnable; streak pauses
            std::uint64_t s = ++streak[t];
            if (s > rep.worst_streak) {
                rep.worst_streak = s;
                rep.worst_tid = t;
            }
        }
        if (ts.rule == "Term") {
            running.erase(ts.tid);
            streak.erase(ts.tid);
        }
        if (ts.forked) running.insert(*ts.forked);
    }
    rep.ok = rep.worst_streak <= bound;
    return rep;
}

} // namespace gsv
