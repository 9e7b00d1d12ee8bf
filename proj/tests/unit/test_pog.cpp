#include <doctest.h>

#include <json.hpp>

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gsv/anno_sem.hpp"
#include "gsv/metrics.hpp"
#include "gsv/parser.hpp"
#include "gsv/pog.hpp"

using namespace gsv;

namespace {

AnnoRunResult traced_run(const std::string& text, std::uint64_t max_steps = 1'000'000,
                         AnnoMode mode = AnnoMode::Verify) {
    Program p = parse_program(text);
    RoundRobinScheduler sched;
    AnnoOptions opts;
    opts.record_trace = true;
    opts.max_steps = max_steps;
    opts.mode = mode;
    return run_annotated(p.main, sched, opts);
}

const char* kCountdown =
    "let c = (cons(5)) in\n"
    "while (let n = [c] in (([c] := n - 1); 0 < n)) do skip dec [c] + 1; tt";

const char* kFlag =
    "invariant FLAGINV = flag |-(1)-> _;\n"
    "let flag = (cons(false)) in\n"
    "let m = (new_mutex) in\n"
    "ghost alloc_signal_id as i;\n"
    "ghost init_signal i at 1 as s;\n"
    "ghost mut_init m at 0 with FLAGINV;\n"
    "fork (acquire m; [flag] := true; ghost set_signal s; release m; tt)\n"
    "  giving { mutex[1/2](m, 0, FLAGINV), obs{sig(s, 1)}, signal(s, 1, false) };\n"
    "with m await (let f = [flag] in f) awaiting { sig(s, 1) }";

// Same handoff but the child never fires the signal it owes.
const char* kFlagLivelock =
    "invariant FLAGINV = flag |-(1)-> _;\n"
    "let flag = (cons(false)) in\n"
    "let m = (new_mutex) in\n"
    "ghost alloc_signal_id as i;\n"
    "ghost init_signal i at 1 as s;\n"
    "ghost mut_init m at 0 with FLAGINV;\n"
    "fork (acquire m; release m; tt)\n"
    "  giving { mutex[1/2](m, 0, FLAGINV), obs{sig(s, 1)}, signal(s, 1, false) };\n"
    "with m await (let f = [flag] in f) awaiting { sig(s, 1) }";

Rank bag_of(std::initializer_list<std::pair<std::uint64_t, std::uint64_t>> items) {
    Rank r;
    for (auto& [deg, n] : items) r.add(deg, n);
    return r;
}

const std::set<std::string> kGhostRules = {"NewSignal", "SetSignal",  "MutInit",
                                           "AllocSigId", "InitSignal", "AwaitGate"};

} // namespace

TEST_CASE("a straight-line run builds a path graph") {
    auto r = traced_run("let x = (cons(1)) in (([x] := 2); [x])");
    REQUIRE(r.status == RunStatus::Terminated);
    Pog g = build_pog(r.trace);
    CHECK(g.nodes.size() == r.trace.size());
    REQUIRE(g.nodes.size() > 2);
    CHECK(g.edges.size() == g.nodes.size() - 1);
    for (std::size_t i = 0; i + 1 < g.nodes.size(); ++i) {
        REQUIRE(g.out[i].size() == 1);
        const PogEdge& e = g.edges[g.out[i][0]];
        CHECK(e.from == i);
        CHECK(e.to == i + 1);
        CHECK_FALSE(e.fork);
        CHECK(e.rule == g.nodes[i].rule);
    }
    CHECK(g.out.back().empty());
}

TEST_CASE("a fork step carries two outgoing edges") {
    auto r = traced_run("fork ([y] := 7) giving { y |-(1)-> 0 };\nlet z = (cons(1)) in tt",
                        1000);
    // the donation needs the cell first
    auto r2 = traced_run(
        "let y = (cons(0)) in\n"
        "(fork ([y] := 7) giving { y |-(1)-> 0 }; (let z = (cons(1)) in tt))");
    REQUIRE(r2.status == RunStatus::Terminated);
    Pog g = build_pog(r2.trace);
    std::size_t fork_node = g.nodes.size();
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        if (g.nodes[i].rule == "Fork") fork_node = i;
    REQUIRE(fork_node < g.nodes.size());
    REQUIRE(g.out[fork_node].size() == 2);
    bool saw_fork = false, saw_cont = false;
    for (std::size_t e : g.out[fork_node]) {
        const PogEdge& ed = g.edges[e];
        CHECK(ed.rule == "Fork");
        if (ed.fork) {
            saw_fork = true;
            CHECK(g.nodes[ed.to].tid != g.nodes[fork_node].tid);
        } else {
            saw_cont = true;
            CHECK(g.nodes[ed.to].tid == g.nodes[fork_node].tid);
        }
    }
    CHECK(saw_fork);
    CHECK(saw_cont);
    (void)r;
}

TEST_CASE("a single-root graph is a binary tree") {
    auto r = traced_run(kFlag);
    REQUIRE(r.status == RunStatus::Terminated);
    Pog g = build_pog(r.trace);
    std::vector<std::size_t> indeg(g.nodes.size(), 0);
    for (const PogEdge& e : g.edges) ++indeg[e.to];
    CHECK(indeg[0] == 0);
    for (std::size_t i = 1; i < g.nodes.size(); ++i) CHECK(indeg[i] == 1);
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        CHECK(g.out[i].size() <= 2);
        std::size_t same = 0, forks = 0;
        for (std::size_t e : g.out[i]) (g.edges[e].fork ? forks : same) += 1;
        CHECK(same <= 1);
        CHECK(forks <= 1);
    }
}

TEST_CASE("await statistics on a terminating handoff") {
    auto r = traced_run(kFlag);
    REQUIRE(r.status == RunStatus::Terminated);
    Pog g = build_pog(r.trace);
    AwaitStats s = await_stats(g);
    CHECK_FALSE(s.waited.empty());
    CHECK(s.persistent.empty());
    for (const auto& [sig, edges] : s.await_edges) {
        CHECK(s.waited.count(sig));
        for (std::size_t e : edges) {
            CHECK(g.edges[e].rule == "Await");
            CHECK(g.edges[e].signal == sig);
        }
    }
}

TEST_CASE("a run without waiting has empty await statistics") {
    auto r = traced_run(kCountdown);
    REQUIRE(r.status == RunStatus::Terminated);
    AwaitStats s = await_stats(build_pog(r.trace));
    CHECK(s.await_edges.empty());
    CHECK(s.waited.empty());
    CHECK(s.persistent.empty());
}

TEST_CASE("a signal that is never fired becomes persistent") {
    auto r = traced_run(kFlagLivelock, 400, AnnoMode::Explore);
    REQUIRE(r.status == RunStatus::Budget);
    Pog g = build_pog(r.trace);
    AwaitStats s = await_stats(g);
    REQUIRE_FALSE(s.waited.empty());
    CHECK_FALSE(s.persistent.empty());
    CHECK(s.persistent == s.waited);

    RankReport rep = verify_rank_descent(g);
    CHECK_FALSE(rep.precondition_ok);
    CHECK(rep.persistent == s.persistent);
    CHECK_FALSE(rep.ok());
    CHECK(rep.str().find("not applicable") != std::string::npos);
}

TEST_CASE("rank extraction follows the command structure") {
    RankContext ctx;
    CmdPtr leaf = Cmd::expc(parse_expr_text("0 < x"));
    CHECK(extract_rank(Cmd::alloc(parse_expr_text("5")), ctx).empty());
    CHECK(extract_rank(Cmd::while_(leaf), ctx) == bag_of({{2, 1}}));
    CHECK(extract_rank(Cmd::while_dec_started(3, leaf), ctx) == bag_of({{1, 3}}));
    CHECK(extract_rank(Cmd::let_("x", Cmd::while_(leaf), Cmd::alloc(parse_expr_text("1"))),
                       ctx) == bag_of({{2, 1}}));
    CHECK(extract_rank(Cmd::fork(Cmd::while_(leaf)), ctx) == bag_of({{2, 1}}));

    // a started await loop weighs the suffix await edges on its signals
    std::vector<AwaitItem> items;
    CmdPtr aw = Cmd::await_started(items, parse_expr_text("m"), leaf);
    std::map<const Cmd*, std::set<std::int64_t>> loops;
    loops[aw.get()] = {5, 9};
    ctx.loop_signals = &loops;
    ctx.suffix_await_edges[5] = 4;
    ctx.suffix_await_edges[9] = 2;
    ctx.suffix_await_edges[7] = 100; // unrelated signal
    CHECK(extract_rank(aw, ctx) == bag_of({{1, 6}}));
}

TEST_CASE("dershowitz-manna descent of the loop unrolls") {
    for (std::uint64_t d = 0; d <= 3; ++d) {
        for (std::uint64_t k = 0; k <= 5; ++k) {
            // one await iteration: (1+k) waits at degree d+1 become the body
            // at degree d plus k remaining waits
            Rank before = bag_of({{d + 1, 1 + k}});
            Rank after = bag_of({{d, 1}, {d + 1, k}});
            CHECK(rank_lt(after, before));
            CHECK_FALSE(rank_lt(before, after));
            // entering a counting loop: {d+2} covers any k unrolls at d+1
            CHECK(rank_lt(bag_of({{d + 1, k}}), bag_of({{d + 2, 1}})));
        }
    }
    CHECK_FALSE(rank_lt(Rank{}, Rank{}));
    CHECK(rank_lt(Rank{}, bag_of({{0, 1}})));
}

TEST_CASE("the fast bag order agrees with the search-based one") {
    std::mt19937 rng(7);
    auto random_bag = [&]() {
        Rank r;
        for (std::uint64_t v = 0; v <= 3; ++v) r.add(v, rng() % 3);
        return r;
    };
    auto lt = [](std::uint64_t a, std::uint64_t b) { return a < b; };
    for (int i = 0; i < 300; ++i) {
        Rank a = random_bag(), b = random_bag();
        CHECK(rank_lt(a, b) == dm_less(a, b, lt));
        CHECK_FALSE(rank_lt(a, a));
    }
}

TEST_CASE("rank descent holds on a counting loop run") {
    auto r = traced_run(kCountdown);
    REQUIRE(r.status == RunStatus::Terminated);
    Pog g = build_pog(r.trace);
    RankReport rep = verify_rank_descent(g);
    INFO(rep.str());
    CHECK(rep.ok());
    CHECK(rep.paths == 1);
    CHECK(rep.edges_checked == g.edges.size());
    CHECK(rep.violations == 0);
    bool saw_strict = false;
    for (const RankCheckEntry& e : rep.entries) saw_strict |= e.strict;
    CHECK(saw_strict);
}

TEST_CASE("rank descent holds across an await handoff") {
    auto r = traced_run(kFlag);
    REQUIRE(r.status == RunStatus::Terminated);
    Pog g = build_pog(r.trace);
    RankReport rep = verify_rank_descent(g);
    INFO(rep.str());
    CHECK(rep.ok());
    CHECK(rep.paths == 2);
    CHECK(rep.edges_checked == g.edges.size());
}

TEST_CASE("rank descent holds with a fresh loop nested under a started one") {
    auto r = traced_run(
        "let c = (cons(3)) in let d = (cons(0)) in\n"
        "while (let n = [c] in\n"
        "  (([d] := 2);\n"
        "   (while (let k = [d] in (([d] := k - 1); 0 < k)) do skip dec [d] + 1);\n"
        "   ([c] := n - 1); 0 < n))\n"
        "do skip dec [c] + 1; tt");
    REQUIRE(r.status == RunStatus::Terminated);
    Pog g = build_pog(r.trace);
    RankReport rep = verify_rank_descent(g);
    INFO(rep.str());
    CHECK(rep.ok());
    CHECK(rep.violations == 0);
}

TEST_CASE("command size shrinks on every real non-loop step") {
    for (const char* prog : {kCountdown, kFlag}) {
        auto r = traced_run(prog);
        REQUIRE(r.status == RunStatus::Terminated);
        Pog g = build_pog(r.trace);
        for (const PogEdge& e : g.edges) {
            if (is_loop_rule(e.rule)) continue;
            std::uint64_t before = cmd_size(g.nodes[e.from].cmd);
            std::uint64_t after = cmd_size(g.nodes[e.to].cmd);
            CAPTURE(e.rule);
            if (e.fork || !kGhostRules.count(e.rule))
                CHECK(after < before);
            else
                CHECK(after == before);
        }
    }
}

TEST_CASE("the json report mirrors the checked edges") {
    auto r = traced_run(kCountdown);
    REQUIRE(r.status == RunStatus::Terminated);
    RankReport rep = verify_rank_descent(build_pog(r.trace));
    auto doc = nlohmann::json::parse(rank_report_json(rep));
    CHECK(doc["ok"] == true);
    CHECK(doc["paths"] == 1);
    CHECK(doc["violations"] == 0);
    REQUIRE(doc["entries"].is_array());
    CHECK(doc["entries"].size() == rep.edges_checked);
    for (const auto& e : doc["entries"]) {
        CHECK(e.contains("path_id"));
        CHECK(e.contains("node"));
        CHECK(e.contains("edge_case"));
        CHECK(e.contains("rank_before"));
        CHECK(e.contains("rank_after"));
        CHECK(e["ok"] == true);
    }
}

TEST_CASE("dot export") {
    Pog empty;
    CHECK(export_dot(empty) == "digraph pog {}\n");

    auto r = traced_run(kFlag);
    REQUIRE(r.status == RunStatus::Terminated);
    Pog g = build_pog(r.trace);
    std::string dot = export_dot(g);
    CHECK(dot.find("digraph pog {") == 0);
    CHECK(dot.find("n0 ") != std::string::npos);
    CHECK(dot.find("style=dashed") != std::string::npos); // the fork edge
    CHECK(dot.find("style=bold") != std::string::npos);   // loop edges
    CHECK(dot.find("sig=") != std::string::npos);         // await labels
    // one edge line per edge
    std::size_t arrows = 0, at = 0;
    while ((at = dot.find("->", at)) != std::string::npos) {
        ++arrows;
        at += 2;
    }
    CHECK(arrows == g.edges.size());
}
