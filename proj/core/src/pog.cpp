#include "gsv/pog.hpp"

#include <json.hpp>

#include <algorithm>
#include <functional>
#include <sstream>

#include "gsv/metrics.hpp"

namespace gsv {

namespace {

// The started loop a step is reducing, if any: stepping descends through
// let/if frames whose left side is not yet a value.
const Cmd* active_redex(const CmdPtr& cmd) {
    const Cmd* c = cmd.get();
    while (c && (c->kind == Cmd::Kind::Let || c->kind == Cmd::Kind::If) && !as_value(c->c1))
        c = c->c1.get();
    return c;
}

} // namespace

bool is_loop_rule(const std::string& rule) {
    return rule == "WhileDecInit" || rule == "WhileDec" || rule == "AwaitInit" ||
           rule == "Await";
}

Pog build_pog(const std::vector<TraceStep>& trace) {
    Pog g;
    g.nodes.reserve(trace.size());
    std::map<ThreadId, std::uint64_t> first_step;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const TraceStep& t = trace[i];
        Pog::Node n;
        n.tid = t.tid;
        n.rule = t.rule;
        if (t.wait_signal) n.wait_signal = t.wait_signal->first;
        if (t.set_signal) n.set_signal = static_cast<std::int64_t>(*t.set_signal);
        n.cmd = t.cmd_before;
        g.nodes.push_back(std::move(n));
        first_step.emplace(t.tid, i);
    }

    auto add_edge = [&](std::uint64_t from, std::uint64_t to, bool fork) {
        PogEdge e;
        e.from = from;
        e.to = to;
        e.tid = fork ? g.nodes[to].tid : g.nodes[from].tid;
        e.rule = g.nodes[from].rule;
        if (e.rule == "Await") e.signal = g.nodes[from].wait_signal;
        e.fork = fork;
        g.edges.push_back(std::move(e));
    };

    std::map<ThreadId, std::uint64_t> last_step;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const TraceStep& t = trace[i];
        auto it = last_step.find(t.tid);
        if (it != last_step.end()) add_edge(it->second, i, false);
        last_step[t.tid] = i;
        if (t.forked) {
            auto fs = first_step.find(*t.forked);
            if (fs != first_step.end()) add_edge(i, fs->second, true);
        }
    }

    g.out.assign(g.nodes.size(), {});
    for (std::size_t e = 0; e < g.edges.size(); ++e) g.out[g.edges[e].from].push_back(e);
    return g;
}

AwaitStats await_stats(const Pog& g, double horizon_fraction) {
    AwaitStats s;
    std::set<std::int64_t> set_signals;
    for (const Pog::Node& n : g.nodes)
        if (n.set_signal) set_signals.insert(*n.set_signal);

    double tail = std::clamp(horizon_fraction, 0.0, 1.0);
    auto cutoff = static_cast<std::uint64_t>(
        static_cast<double>(g.nodes.size()) * (1.0 - tail));
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        const PogEdge& ed = g.edges[e];
        if (ed.rule != "Await" || !ed.signal) continue;
        s.await_edges[*ed.signal].push_back(e);
        s.waited.insert(*ed.signal);
        if (ed.from >= cutoff && !set_signals.count(*ed.signal))
            s.persistent.insert(*ed.signal);
    }
    return s;
}

bool rank_lt(const Rank& a, const Rank& b) {
    // Dershowitz-Manna over a totally ordered base collapses to: at the
    // largest degree where the multiplicities differ, `a` has fewer.
    if (a == b) return false;
    auto ia = a.entries().rbegin(), ea = a.entries().rend();
    auto ib = b.entries().rbegin(), eb = b.entries().rend();
    while (ia != ea && ib != eb) {
        if (ia->first != ib->first) return ia->first < ib->first;
        if (ia->second != ib->second) return ia->second < ib->second;
        ++ia;
        ++ib;
    }
    return ia == ea;
}

bool rank_leq(const Rank& a, const Rank& b) { return a == b || rank_lt(a, b); }

std::string rank_str(const Rank& r) {
    std::ostringstream os;
    os << "{|";
    bool first = true;
    for (const auto& [deg, n] : r.entries()) {
        if (!first) os << ", ";
        first = false;
        os << deg;
        if (n > 1) os << "x" << n;
    }
    os << "|}";
    return os.str();
}

Rank extract_rank(const CmdPtr& c, const RankContext& ctx) {
    if (!c) return {};
    switch (c->kind) {
    case Cmd::Kind::While: {
        Rank r;
        r.add(extract_degree(c));
        return r;
    }
    case Cmd::Kind::WhileDecStarted: {
        Rank r;
        r.add(extract_degree(c), c->bound);
        return r;
    }
    case Cmd::Kind::AwaitStarted: {
        std::uint64_t n = 0;
        if (ctx.loop_signals) {
            auto it = ctx.loop_signals->find(c.get());
            if (it != ctx.loop_signals->end())
                for (std::int64_t sig : it->second) {
                    auto cn = ctx.suffix_await_edges.find(sig);
                    if (cn != ctx.suffix_await_edges.end()) n += cn->second;
                }
        }
        Rank r;
        r.add(extract_degree(c), n);
        return r;
    }
    case Cmd::Kind::Let:
    case Cmd::Kind::If:
        return bag_union(extract_rank(c->c1, ctx), extract_rank(c->c2, ctx));
    case Cmd::Kind::Fork:
    case Cmd::Kind::Ghost:
        return extract_rank(c->c1, ctx);
    default: return {};
    }
}

RankReport verify_rank_descent(const Pog& g, double horizon_fraction) {
    RankReport rep;
    AwaitStats stats = await_stats(g, horizon_fraction);
    if (!stats.persistent.empty()) {
        rep.precondition_ok = false;
        rep.persistent = stats.persistent;
        return rep;
    }
    if (g.nodes.empty()) return rep;

    // Enumerate maximal paths (root-to-leaf in the fork tree).
    std::vector<std::vector<std::size_t>> paths; // edge index sequences
    std::vector<std::size_t> cur;
    std::function<void(std::uint64_t)> walk = [&](std::uint64_t node) {
        if (g.out[node].empty()) {
            paths.push_back(cur);
            return;
        }
        for (std::size_t e : g.out[node]) {
            cur.push_back(e);
            walk(g.edges[e].to);
            cur.pop_back();
        }
    };
    walk(0);
    rep.paths = paths.size();

    for (std::size_t pid = 0; pid < paths.size(); ++pid) {
        const std::vector<std::size_t>& pe = paths[pid];
        std::vector<std::uint64_t> pnodes;
        pnodes.push_back(0);
        for (std::size_t e : pe) pnodes.push_back(g.edges[e].to);

        // Signals each started await loop waits on anywhere along this path,
        // keyed by the loop's stable node pointer.
        std::map<const Cmd*, std::set<std::int64_t>> loop_signals;
        for (std::size_t k = 0; k < pe.size(); ++k) {
            const PogEdge& e = g.edges[pe[k]];
            if (e.rule != "Await" || !e.signal) continue;
            const Cmd* owner = active_redex(g.nodes[e.from].cmd);
            if (owner && owner->kind == Cmd::Kind::AwaitStarted)
                loop_signals[owner].insert(*e.signal);
        }

        // Rank every node against its own suffix: walk backwards so the
        // per-signal await counts accumulate exactly the edges not yet
        // passed.
        RankContext ctx;
        ctx.loop_signals = &loop_signals;
        std::vector<Rank> ranks(pnodes.size());
        for (std::size_t k = pnodes.size(); k-- > 0;) {
            if (k < pe.size()) {
                const PogEdge& e = g.edges[pe[k]];
                if (e.rule == "Await" && e.signal) ++ctx.suffix_await_edges[*e.signal];
            }
            ranks[k] = extract_rank(g.nodes[pnodes[k]].cmd, ctx);
        }

        for (std::size_t k = 0; k < pe.size(); ++k) {
            const PogEdge& e = g.edges[pe[k]];
            RankCheckEntry ent;
            ent.path_id = pid;
            ent.node = e.from;
            ent.next = e.to;
            ent.edge_case = e.rule;
            if (e.rule == "Await" && e.signal)
                ent.edge_case += "(" + std::to_string(*e.signal) + ")";
            ent.rank_before = rank_str(ranks[k]);
            ent.rank_after = rank_str(ranks[k + 1]);
            ent.strict = is_loop_rule(e.rule);
            ent.ok = ent.strict ? rank_lt(ranks[k + 1], ranks[k])
                                : rank_leq(ranks[k + 1], ranks[k]);
            if (!ent.ok) ++rep.violations;
            ++rep.edges_checked;
            rep.entries.push_back(std::move(ent));
        }
    }
    return rep;
}

std::string RankReport::str() const {
    std::ostringstream os;
    if (!precondition_ok) {
        os << "rank descent not applicable: persistent wait set {";
        bool first = true;
        for (std::int64_t s : persistent) {
            if (!first) os << ", ";
            first = false;
            os << s;
        }
        os << "}";
        return os.str();
    }
    os << "rank descent: " << paths << " path" << (paths == 1 ? "" : "s") << ", "
       << edges_checked << " edge" << (edges_checked == 1 ? "" : "s") << ", " << violations
       << " violation" << (violations == 1 ? "" : "s");
    return os.str();
}

std::string rank_report_json(const RankReport& r) {
    nlohmann::json doc;
    doc["precondition_ok"] = r.precondition_ok;
    doc["persistent"] = r.persistent;
    doc["paths"] = r.paths;
    doc["edges_checked"] = r.edges_checked;
    doc["violations"] = r.violations;
    doc["ok"] = r.ok();
    nlohmann::json entries = nlohmann::json::array();
    for (const RankCheckEntry& e : r.entries) {
        nlohmann::json j;
        j["path_id"] = e.path_id;
        j["node"] = e.node;
        j["next"] = e.next;
        j["edge_case"] = e.edge_case;
        j["rank_before"] = e.rank_before;
        j["rank_after"] = e.rank_after;
        j["strict"] = e.strict;
        j["ok"] = e.ok;
        entries.push_back(std::move(j));
    }
    doc["entries"] = std::move(entries);
    return doc.dump(2);
}

std::string export_dot(const Pog& g) {
    if (g.nodes.empty()) return "digraph pog {}\n";
    std::ostringstream os;
    os << "digraph pog {\n";
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        os << "  n" << i << " [label=\"" << i << ": " << g.nodes[i].rule << " t"
           << g.nodes[i].tid << "\"];\n";
    }
    for (const PogEdge& e : g.edges) {
        os << "  n" << e.from << " -> n" << e.to << " [label=\"t" << e.tid << " " << e.rule;
        if (e.signal) os << " sig=" << *e.signal;
        os << "\"";
        if (is_loop_rule(e.rule)) os << ", style=bold";
        if (e.fork) os << ", style=dashed";
        os << "];\n";
    }
    os << "}\n";
    return os.str();
}

} // namespace gsv
