#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gsv/cmd.hpp"
#include "gsv/entail.hpp"

namespace gsv {

// Symbolic thread-local state: a disjunction of cases plus the counter used
// to freshen wildcard contents. Transformers either rewrite every case or
// report why some case cannot take the step.
struct SymState {
    std::vector<StateCase> cases;
    std::uint64_t fresh = 0;

    void prune(); // drop unsatisfiable cases
    std::string str() const;
};

// Spends the full mutex share of every case (its level must sit strictly
// below all held obligations), takes the locked chunk and the mutex
// obligation, and conjoins the invariant body.
std::optional<std::string> sym_acquire(SymState& st, const Expr& m);

// Requires the locked chunk, re-establishes the invariant body, discharges
// the mutex obligation, and returns the spent share.
std::optional<std::string> sym_release(SymState& st, const Expr& m);

// Logical-state-only commands (signal creation and discharge, mutex
// initialization). AwaitGate is rejected: it only exists inside an unrolled
// await loop, which the outline rules handle directly.
std::optional<std::string> sym_ghost(SymState& st, const GhostCmd& g);

// Level admissibility of a wait: every awaited signal must sit strictly
// below every held obligation, except the obligation for the mutex that the
// await loop itself holds.
std::optional<std::string> sym_gate_check(const StateCase& c, const std::vector<AwaitItem>& items,
                                          const Expr& m);

} // namespace gsv
