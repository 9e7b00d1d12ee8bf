#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gsv/bag.hpp"
#include "gsv/cmd.hpp"
#include "gsv/schedule.hpp"

namespace gsv {

// One control-flow edge of a trace graph: step `to` continues the control
// flow of step `from`. The label is the *source* step's rule tag; await
// steps additionally carry the signal that justified the wait.
struct PogEdge {
    std::uint64_t from = 0;
    std::uint64_t to = 0;
    ThreadId tid = 0;
    std::string rule;
    std::optional<std::int64_t> signal; // set when rule == "Await"
    bool fork = false;                  // to is the first step of a forked thread
};

// Control-flow graph over an annotated trace. Node k is the trace's k-th
// step. Every node has at most one same-thread successor edge (the first
// step that reschedules the same thread) and at most one fork edge (the
// first step of the thread it forked), so a run that starts from a single
// thread forms a binary tree rooted at step 0.
struct Pog {
    struct Node {
        ThreadId tid = 0;
        std::string rule;
        std::optional<std::int64_t> wait_signal;
        std::optional<std::int64_t> set_signal;
        CmdPtr cmd; // the stepped thread's command before the step
    };

    std::vector<Node> nodes;
    std::vector<PogEdge> edges;
    std::vector<std::vector<std::size_t>> out; // outgoing edge indexes per node
};

// Rules whose edges unroll a loop; rank must strictly drop across these.
bool is_loop_rule(const std::string& rule);

Pog build_pog(const std::vector<TraceStep>& trace);

// Await-edge statistics. `waited` collects every signal with at least one
// await edge. `persistent` is the finite-horizon stand-in for "waited for
// infinitely often": signals with an await edge in the final
// `horizon_fraction` share of the trace that are never set anywhere in the
// trace. On terminating runs it must come out empty; a signal that stays in
// it marks a loop the run never got past.
struct AwaitStats {
    std::map<std::int64_t, std::vector<std::size_t>> await_edges; // signal -> edge idxs
    std::set<std::int64_t> waited;
    std::set<std::int64_t> persistent;
};

AwaitStats await_stats(const Pog& g, double horizon_fraction = 0.25);

// A rank is a finite bag of loop-nesting degrees; ranks are compared in the
// Dershowitz-Manna order, which is well-founded, so a strictly descending
// rank along every loop edge bounds the number of loop iterations.
using Rank = Bag<std::uint64_t>;

bool rank_lt(const Rank& a, const Rank& b);
bool rank_leq(const Rank& a, const Rank& b);
std::string rank_str(const Rank& r);

// Context a rank is computed against: the per-signal await-edge counts of
// the path suffix that starts at the ranked node, plus the signals each
// started await loop (identified by its stable node pointer) waits on along
// the whole path.
struct RankContext {
    std::map<std::int64_t, std::uint64_t> suffix_await_edges;
    const std::map<const Cmd*, std::set<std::int64_t>>* loop_signals = nullptr;
};

// Rank of a command: a fresh loop weighs one bag element at its own degree,
// a started counting loop weighs its remaining unrolls at its degree, and a
// started await loop weighs the await edges still ahead of it at its degree;
// let/if collect both parts, fork and ghost pass through, and everything
// else is empty.
Rank extract_rank(const CmdPtr& c, const RankContext& ctx);

// One checked edge of one root-to-leaf path.
struct RankCheckEntry {
    std::size_t path_id = 0;
    std::uint64_t node = 0; // source step
    std::uint64_t next = 0; // target step
    std::string edge_case;  // rule tag of the edge
    std::string rank_before;
    std::string rank_after;
    bool strict = false; // loop edge: must strictly decrease
    bool ok = false;
};

struct RankReport {
    bool precondition_ok = true;        // persistent wait set was empty
    std::set<std::int64_t> persistent;  // offenders when it was not
    std::size_t paths = 0;
    std::size_t edges_checked = 0;
    std::vector<RankCheckEntry> entries;
    std::size_t violations = 0;

    bool ok() const { return precondition_ok && violations == 0; }
    std::string str() const;
};

// Walks every maximal path from the root, ranks each node against its own
// suffix, and checks that ranks strictly decrease across loop edges and
// never increase elsewhere. Refuses to certify anything when the persistent
// wait set is nonempty, since ranks are only defined without endless waits.
RankReport verify_rank_descent(const Pog& g, double horizon_fraction = 0.25);

// Machine-readable form of the report: one object per checked edge with
// path_id, node, edge_case, rank_before, rank_after, ok.
std::string rank_report_json(const RankReport& r);

// DOT rendering; await edges carry their signal in the label and loop edges
// are drawn bold.
std::string export_dot(const Pog& g);

} // namespace gsv
