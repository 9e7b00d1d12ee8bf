#include "gsv/viewshift.hpp"

#include <algorithm>

#include "gsv/models.hpp"

namespace gsv {

namespace {

bool proves_level_lt(const PureCtx& px, const StateCase& c, const Expr& small, const Expr& big) {
    PureAtom goal;
    goal.kind = PureAtom::Kind::LtZ;
    goal.lin = norm_lin(small, &c);
    goal.lin.add(norm_lin(big, &c), Rational(-1));
    return px.proves(goal);
}

AssertionPtr body_or_true(const AssertionPtr& inv) {
    return inv ? inv : Assertion::bool_lit(true);
}

// Re-establishes `a` inside `c` by carving its first matching disjunct.
std::optional<std::string> carve_assertion(StateCase& c, const AssertionPtr& a) {
    std::uint64_t dummy = 0;
    std::string last = "no disjunct applies";
    for (const StateCase& t : assertion_cases(a, false, dummy)) {
        StateCase copy = c;
        std::string w;
        if (case_carve(copy, t, &w)) {
            c = std::move(copy);
            return std::nullopt;
        }
        last = w;
    }
    return last;
}

// Applies `f` to every satisfiable case; `f` appends its results to the new
// case list and may fail with a description.
template <typename F>
std::optional<std::string> map_cases(SymState& st, F&& f) {
    std::vector<StateCase> next;
    for (const StateCase& c : st.cases) {
        if (case_unsat(c)) continue;
        if (auto err = f(c, next)) return err;
    }
    st.cases = std::move(next);
    return std::nullopt;
}

std::string fresh_name(SymState& st) { return "?" + std::to_string(st.fresh++); }

} // namespace

void SymState::prune() {
    std::erase_if(cases, [](const StateCase& c) { return case_unsat(c); });
}

std::string SymState::str() const {
    if (cases.empty()) return "(no reachable case)";
    std::string s;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        if (i) s += "  |  ";
        s += cases[i].str();
    }
    return s;
}

std::optional<std::string> sym_acquire(SymState& st, const Expr& m) {
    return map_cases(st, [&](const StateCase& c, std::vector<StateCase>& out)
                             -> std::optional<std::string> {
        PureCtx px(c);
        std::vector<std::size_t> idxs;
        for (std::size_t i = 0; i < c.chunks.size(); ++i) {
            const auto& ch = c.chunks[i];
            if (ch->kind == Assertion::Kind::MutexPart && !ch->a1.wild &&
                exprs_match(px, c, ch->a1.e, m))
                idxs.push_back(i);
        }
        if (idxs.empty())
            return "acquire without a share of the mutex " + m.str() + " in " + c.str();
        const AssertionPtr& first = c.chunks[idxs[0]];
        if (first->a2.wild) return "acquire of a mutex with an unknown level: " + m.str();
        Expr lev = first->a2.e;
        for (const ObsItem& o : c.obs) {
            if (!proves_level_lt(px, c, lev, o.level))
                return "acquire: mutex level " + lev.str() +
                       " not below all held obligations (cannot show " + lev.str() + " < " +
                       o.level.str() + ")";
        }
        Rational q(0);
        for (std::size_t i : idxs) q += c.chunks[i]->frac.value();
        StateCase base;
        base.pures = c.pures;
        base.obs = c.obs;
        for (std::size_t i = 0; i < c.chunks.size(); ++i)
            if (std::find(idxs.begin(), idxs.end(), i) == idxs.end())
                base.chunks.push_back(c.chunks[i]);
        base.chunks.push_back(Assertion::locked_part(first->a1, first->a2, first->inv_name,
                                                     first->inv, false, Fraction(q)));
        ObsItem mut;
        mut.is_mutex = true;
        mut.target = m;
        mut.level = lev;
        base.obs.push_back(std::move(mut));
        for (StateCase& r : case_merge(base, body_or_true(first->inv), st.fresh))
            out.push_back(std::move(r));
        return std::nullopt;
    });
}

std::optional<std::string> sym_release(SymState& st, const Expr& m) {
    return map_cases(st, [&](const StateCase& c, std::vector<StateCase>& out)
                             -> std::optional<std::string> {
        PureCtx px(c);
        std::size_t li = c.chunks.size();
        for (std::size_t i = 0; i < c.chunks.size(); ++i) {
            const auto& ch = c.chunks[i];
            if (ch->kind == Assertion::Kind::LockedPart && !ch->a1.wild &&
                exprs_match(px, c, ch->a1.e, m)) {
                li = i;
                break;
            }
        }
        if (li == c.chunks.size())
            return "release without the locked chunk for " + m.str() + " in " + c.str();
        AssertionPtr lk = c.chunks[li];
        if (lk->held_wild) return "release of a mutex with an unknown spent share: " + m.str();

        StateCase rest = c;
        rest.chunks.erase(rest.chunks.begin() + static_cast<std::ptrdiff_t>(li));
        if (auto err = carve_assertion(rest, body_or_true(lk->inv)))
            return "release: mutex invariant does not hold (" + *err + ")";

        PureCtx rx(rest);
        auto it = std::find_if(rest.obs.begin(), rest.obs.end(), [&](const ObsItem& o) {
            return o.is_mutex && exprs_match(rx, rest, o.target, m);
        });
        if (it == rest.obs.end()) return "release of a mutex the thread does not owe: " + m.str();
        rest.obs.erase(it);

        rest.chunks.push_back(Assertion::mutex_part(lk->a1, lk->a2, lk->inv_name, lk->inv,
                                                    Fraction(lk->held.value())));
        out.push_back(std::move(rest));
        return std::nullopt;
    });
}

std::optional<std::string> sym_ghost(SymState& st, const GhostCmd& g) {
    switch (g.kind) {
    case GhostCmd::Kind::NewSignal: {
        std::string id = g.binder == "_" ? fresh_name(st) : g.binder;
        return map_cases(st, [&](const StateCase& c, std::vector<StateCase>& out)
                                 -> std::optional<std::string> {
            StateCase n = c;
            n.chunks.push_back(Assertion::signal_part(AArg::of(Expr::var(id)), AArg::of(g.a),
                                                      AArg::of(Expr::lit(Value::boolean(false)))));
            ObsItem ob;
            ob.target = Expr::var(id);
            ob.level = g.a;
            n.obs.push_back(std::move(ob));
            out.push_back(std::move(n));
            return std::nullopt;
        });
    }
    case GhostCmd::Kind::SetSignal:
        return map_cases(st, [&](const StateCase& c, std::vector<StateCase>& out)
                                 -> std::optional<std::string> {
            PureCtx px(c);
            std::vector<std::size_t> idxs;
            Rational have(0);
            for (std::size_t i = 0; i < c.chunks.size(); ++i) {
                const auto& ch = c.chunks[i];
                if (ch->kind != Assertion::Kind::SignalPart || ch->a1.wild) continue;
                if (!exprs_match(px, c, ch->a1.e, g.a)) continue;
                if (ch->a3.wild || !px.proves_expr(ch->a3.e, false)) continue;
                idxs.push_back(i);
                have += ch->frac.value();
            }
            if (idxs.empty() || !(have == Rational(1)))
                return "set_signal requires the full unset signal chunk for " + g.a.str();
            const AssertionPtr& first = c.chunks[idxs[0]];
            if (first->a2.wild) return "set_signal of a signal with an unknown level";

            StateCase n;
            n.pures = c.pures;
            n.obs = c.obs;
            for (std::size_t i = 0; i < c.chunks.size(); ++i)
                if (std::find(idxs.begin(), idxs.end(), i) == idxs.end())
                    n.chunks.push_back(c.chunks[i]);
            n.chunks.push_back(Assertion::signal_part(first->a1, first->a2,
                                                      AArg::of(Expr::lit(Value::boolean(true)))));

            auto it = std::find_if(n.obs.begin(), n.obs.end(), [&](const ObsItem& o) {
                return !o.is_mutex && exprs_match(px, c, o.target, g.a) &&
                       exprs_match(px, c, o.level, first->a2.e);
            });
            if (it == n.obs.end())
                return "set_signal without the matching obligation for " + g.a.str();
            n.obs.erase(it);
            out.push_back(std::move(n));
            return std::nullopt;
        });
    case GhostCmd::Kind::MutInit: {
        AssertionPtr inv = body_or_true(g.inv);
        if (assertion_has_obs(inv))
            return "mutex invariant may not mention obligations: " + g.inv_name;
        return map_cases(st, [&](const StateCase& c, std::vector<StateCase>& out)
                                 -> std::optional<std::string> {
            StateCase n = c;
            StateCase un;
            un.chunks.push_back(Assertion::uninit_cell(AArg::of(g.a)));
            std::string w;
            if (!case_carve(n, un, &w))
                return "mut_init requires the uninitialized mutex cell (" + w + ")";
            if (auto err = carve_assertion(n, inv))
                return "mut_init: mutex invariant does not hold (" + *err + ")";
            n.chunks.push_back(
                Assertion::mutex_part(AArg::of(g.a), AArg::of(g.b), g.inv_name, g.inv));
            out.push_back(std::move(n));
            return std::nullopt;
        });
    }
    case GhostCmd::Kind::AllocSignalId: {
        std::string id = g.binder == "_" ? fresh_name(st) : g.binder;
        return map_cases(st, [&](const StateCase& c, std::vector<StateCase>& out)
                                 -> std::optional<std::string> {
            StateCase n = c;
            n.chunks.push_back(Assertion::uninit_sig(AArg::of(Expr::var(id))));
            out.push_back(std::move(n));
            return std::nullopt;
        });
    }
    case GhostCmd::Kind::InitSignal: {
        return map_cases(st, [&](const StateCase& c, std::vector<StateCase>& out)
                                 -> std::optional<std::string> {
            PureCtx px(c);
            std::vector<std::size_t> idxs;
            Rational have(0);
            for (std::size_t i = 0; i < c.chunks.size(); ++i) {
                const auto& ch = c.chunks[i];
                if (ch->kind != Assertion::Kind::UninitSigPart || ch->a1.wild) continue;
                if (!exprs_match(px, c, ch->a1.e, g.a)) continue;
                idxs.push_back(i);
                have += ch->frac.value();
            }
            if (idxs.empty() || !(have == Rational(1)))
                return "init_signal requires the full reservation chunk for " + g.a.str();
            StateCase n;
            n.pures = c.pures;
            n.obs = c.obs;
            for (std::size_t i = 0; i < c.chunks.size(); ++i)
                if (std::find(idxs.begin(), idxs.end(), i) == idxs.end())
                    n.chunks.push_back(c.chunks[i]);
            n.chunks.push_back(Assertion::signal_part(AArg::of(g.a), AArg::of(g.b),
                                                      AArg::of(Expr::lit(Value::boolean(false)))));
            ObsItem ob;
            ob.target = g.a;
            ob.level = g.b;
            n.obs.push_back(std::move(ob));
            if (g.binder != "_")
                n.pures.push_back(Expr::eq(Expr::var(g.binder), g.a));
            out.push_back(std::move(n));
            return std::nullopt;
        });
    }
    case GhostCmd::Kind::AwaitGate:
        return "await gate outside an await loop";
    }
    return "unknown ghost command";
}

std::optional<std::string> sym_gate_check(const StateCase& c, const std::vector<AwaitItem>& items,
                                          const Expr& m) {
    PureCtx px(c);
    if (px.unsat()) return std::nullopt;
    for (const AwaitItem& it : items) {
        for (const ObsItem& o : c.obs) {
            if (o.is_mutex && exprs_match(px, c, o.target, m)) continue;
            if (!proves_level_lt(px, c, it.level, o.level))
                return "await: level " + it.level.str() +
                       " of an awaited signal is not below the level of all held obligations "
                       "(cannot show " +
                       it.level.str() + " < " + o.level.str() + ")";
        }
    }
    return std::nullopt;
}

} // namespace gsv
