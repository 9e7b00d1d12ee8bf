#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gsv/expr.hpp"

namespace gsv {

struct Assertion;
using AssertionPtr = std::shared_ptr<const Assertion>;

// Implemented in assertion.cpp; declared here so command substitution and
// comparison can reach into fork/mutex annotations without a header cycle.
bool assertion_equal(const AssertionPtr& a, const AssertionPtr& b);
bool assertion_mentions(const AssertionPtr& a, const std::string& var);
AssertionPtr assertion_substitute(const AssertionPtr& a, const std::string& var, const Value& v);

struct Cmd;
using CmdPtr = std::shared_ptr<const Cmd>;

// One awaited signal: id and level expressions (ghost-evaluated when the
// loop is entered, so they may dereference heap cells).
struct AwaitItem {
    Expr id;
    Expr level;

    bool operator==(const AwaitItem& o) const { return id == o.id && level == o.level; }
};

using SigLevelSet = std::vector<std::pair<std::int64_t, std::int64_t>>;

// Ghost commands adjust logical state only; erasing them yields the plain
// program. AwaitGate is never written in source text: the annotated
// semantics injects it when unrolling an await loop, to pick (inside the
// critical section) the still-unset signal that justifies the next wait.
struct GhostCmd {
    enum class Kind { NewSignal, SetSignal, MutInit, AllocSignalId, InitSignal, AwaitGate };

    Kind kind = Kind::SetSignal;
    std::string binder;   // NewSignal / AllocSignalId / InitSignal
    Expr a;               // NewSignal: level; SetSignal: id; MutInit: mutex;
                          // InitSignal: id; AwaitGate: loop-body result
    Expr b;               // MutInit: level; InitSignal: level
    std::string inv_name; // MutInit: invariant name as written
    AssertionPtr inv;     // MutInit: resolved invariant body
    std::vector<AwaitItem> gate_items; // AwaitGate: awaited signals, re-evaluated
                                       // against the heap when the gate runs
    Expr gate_mutex;      // AwaitGate: location of the mutex held at the gate

    bool operator==(const GhostCmd& o) const;
    bool mentions(const std::string& var) const;
    GhostCmd substitute(const std::string& var, const Value& v) const;
};

struct LoopAnno {
    enum class Kind { None, Dec, Await };

    Kind kind = Kind::None;
    Expr dec;                      // Dec: loop bound, evaluated on entry
    Expr mutex;                    // Await: guarding mutex
    CmdPtr body;                   // Await: body run under the mutex
    std::vector<AwaitItem> signals; // Await: admissible wait targets

    bool operator==(const LoopAnno& o) const;
};

struct Cmd {
    enum class Kind {
        Exp,
        Let,
        If,
        While,
        Fork,
        Alloc,
        Read,
        Write,
        NewMutex,
        Acquire,
        Release,
        Ghost,
        WhileDecStarted,
        AwaitStarted,
    };

    Kind kind = Kind::Exp;
    Expr e1, e2;           // Exp/Alloc/Read/Acquire/Release: e1; Write: e1 := e2;
                           // AwaitStarted: e1 is the (closed) mutex expression
    std::string binder;    // Let
    CmdPtr c1, c2;         // Let: bound + body; If: condition + then-branch;
                           // While/WhileDecStarted: condition in c1;
                           // Fork/Ghost: child/continuation in c1;
                           // AwaitStarted: loop body in c1
    LoopAnno anno;         // While
    AssertionPtr give;     // Fork: resources handed to the child
    GhostCmd ghost{};      // Ghost
    std::uint64_t bound = 0;   // WhileDecStarted: remaining unrolls
    std::vector<AwaitItem> await_items; // AwaitStarted: admissible signals

    static CmdPtr expc(Expr e);
    static CmdPtr value(Value v);
    static CmdPtr let_(std::string binder, CmdPtr c1, CmdPtr c2);
    static CmdPtr seq(CmdPtr c1, CmdPtr c2);
    static CmdPtr if_(CmdPtr cond, CmdPtr then_branch);
    static CmdPtr while_(CmdPtr cond, LoopAnno anno = {});
    static CmdPtr fork(CmdPtr child, AssertionPtr give = nullptr);
    static CmdPtr alloc(Expr e);
    static CmdPtr read(Expr e);
    static CmdPtr write(Expr e1, Expr e2);
    static CmdPtr new_mutex();
    static CmdPtr acquire(Expr e);
    static CmdPtr release(Expr e);
    static CmdPtr ghost_cmd(GhostCmd g, CmdPtr cont);
    static CmdPtr while_dec_started(std::uint64_t bound, CmdPtr cond);
    static CmdPtr await_started(std::vector<AwaitItem> items, Expr mutex, CmdPtr body);

    bool operator==(const Cmd& o) const;
    bool mentions(const std::string& var) const;

    // Node count over command and expression nodes. Ghost commands and
    // annotation payloads are excluded, so the size of a command equals the
    // size of its erasure.
    std::uint64_t size() const;

    std::string str() const;
};

bool cmd_equal(const CmdPtr& a, const CmdPtr& b);
CmdPtr substitute(const CmdPtr& c, const std::string& var, const Value& v);

// A command is terminal when it is a closed expression with a defined value.
std::optional<Value> as_value(const CmdPtr& c);

// Desugared body of `with e await (c)`:
//   let _ = acquire e in let $r = c in let _ = release e in !$r
CmdPtr await_expansion(const Expr& mutex, const CmdPtr& body);

// Same shape with the wait-justification gate spliced in before the release.
CmdPtr await_expansion_gated(const std::vector<AwaitItem>& items, const Expr& mutex,
                             const CmdPtr& body);

} // namespace gsv
