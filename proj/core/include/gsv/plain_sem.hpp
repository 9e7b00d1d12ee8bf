#pragma once

#include <map>
#include <optional>
#include <string>

#include "gsv/cmd.hpp"
#include "gsv/foundations.hpp"

namespace gsv {

using ThreadId = std::uint64_t;

struct PlainCell {
    enum class Kind { Cell, MutexUnlocked, MutexLocked };
    Kind kind = Kind::Cell;
    Value val;

    bool operator==(const PlainCell& o) const {
        return kind == o.kind && (kind != Kind::Cell || val == o.val);
    }
};

using PlainHeap = std::map<HeapLoc, PlainCell>;

struct PlainMachine {
    PlainHeap heap;
    std::map<ThreadId, CmdPtr> threads; // running threads only
    std::uint64_t next_loc = 0;

    static PlainMachine boot(CmdPtr main);
    ThreadId fresh_tid() const; // smallest id not in the pool
    HeapLoc fresh_loc() { return HeapLoc{next_loc++}; }
};

// Outcome of attempting one step of one thread. A value-command thread takes
// a final "Term" step that removes it from the pool. Blocked means the step
// cannot run now (acquire of a held mutex) and the machine is unchanged.
struct PlainStep {
    enum class Status { Stepped, Blocked, Stuck };
    Status status = Status::Stepped;
    std::string rule;
    std::string reason;
    std::optional<ThreadId> forked;
    std::optional<HeapLoc> touched;
    std::optional<std::int64_t> list_delta; // size change when a list cell is overwritten
    std::optional<Value> result;            // Term
};

PlainStep tp_step(PlainMachine& m, ThreadId tid);

// Whether the thread's next action cannot run right now.
bool plain_blocked(const PlainMachine& m, ThreadId tid);

std::string plain_heap_digest(const PlainHeap& h);

} // namespace gsv
