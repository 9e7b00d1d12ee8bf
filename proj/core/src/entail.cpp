#include "gsv/entail.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

namespace gsv {

namespace {

constexpr int kResolveDepth = 16;

std::int64_t floor_rat(const Rational& t) {
    std::int64_t q = t.num() / t.den();
    if (t.num() % t.den() != 0 && t.num() < 0) --q;
    return q;
}

std::int64_t ceil_rat(const Rational& t) { return -floor_rat(-t); }

LinForm norm_raw(const Expr& e);

std::string opaque_key(const Expr& e) {
    switch (e.kind()) {
    case Expr::Kind::Var:
        return "v:" + e.var_name();
    case Expr::Kind::Lit:
        return "c:" + e.lit_value().str();
    case Expr::Kind::Eq: {
        std::string a = norm_raw(e.args()[0]).str();
        std::string b = norm_raw(e.args()[1]).str();
        if (b < a) std::swap(a, b);
        return "eq(" + a + "," + b + ")";
    }
    case Expr::Kind::Not:
        return "not(" + norm_raw(e.args()[0]).str() + ")";
    case Expr::Kind::Op: {
        std::string s = e.op_name() + "(";
        bool first = true;
        for (const Expr& a : e.args()) {
            if (!first) s += ",";
            first = false;
            s += norm_raw(a).str();
        }
        return s + ")";
    }
    }
    return "?";
}

LinForm norm_raw(const Expr& e) {
    LinForm f;
    if (e.kind() == Expr::Kind::Lit && e.lit_value().is_int()) {
        f.cst = Rational(e.lit_value().as_int());
        return f;
    }
    if (e.kind() == Expr::Kind::Lit && e.lit_value().is_bool()) {
        f.cst = Rational(e.lit_value().as_bool() ? 1 : 0);
        return f;
    }
    if (e.kind() == Expr::Kind::Op && e.args().size() == 2 &&
        (e.op_name() == "+" || e.op_name() == "-")) {
        f = norm_raw(e.args()[0]);
        f.add(norm_raw(e.args()[1]), e.op_name() == "+" ? Rational(1) : Rational(-1));
        return f;
    }
    f.coeffs[opaque_key(e)] = Rational(1);
    return f;
}

// Resolves an expression against a case: dereferences are looked up in the
// points-to chunks, closed subterms fold, list lengths step through append
// and tail, and a closed "ite" condition selects its branch. The depth bound
// cuts pathological points-to cycles.
Expr resolve(const Expr& e, const StateCase* ctx, int depth) {
    auto fold = [](Expr out) {
        if (out.is_closed()) {
            if (auto v = eval_expr(out)) return Expr::lit(*v);
        }
        return out;
    };
    switch (e.kind()) {
    case Expr::Kind::Var:
        if (ctx && depth > 0) {
            auto it = ctx->defs.find(e.var_name());
            if (it != ctx->defs.end()) return resolve(it->second, ctx, depth - 1);
        }
        return e;
    case Expr::Kind::Lit:
        return e;
    case Expr::Kind::Eq:
        return fold(Expr::eq(resolve(e.args()[0], ctx, depth), resolve(e.args()[1], ctx, depth)));
    case Expr::Kind::Not:
        return fold(Expr::negate(resolve(e.args()[0], ctx, depth)));
    case Expr::Kind::Op:
        break;
    }
    const std::string& op = e.op_name();
    if (op == "deref" && e.args().size() == 1) {
        Expr loc = resolve(e.args()[0], ctx, depth > 0 ? depth - 1 : 0);
        if (ctx && depth > 0) {
            std::string lk = norm_raw(loc).str();
            for (const AssertionPtr& ch : ctx->chunks) {
                if (ch->kind != Assertion::Kind::PointsTo || ch->a1.wild || ch->a2.wild)
                    continue;
                if (norm_raw(resolve(ch->a1.e, ctx, depth - 1)).str() == lk)
                    return resolve(ch->a2.e, ctx, depth - 1);
            }
        }
        return Expr::op("deref", {loc});
    }
    if (op == "ite" && e.args().size() == 3) {
        Expr c = resolve(e.args()[0], ctx, depth);
        if (c.kind() == Expr::Kind::Lit && c.lit_value().is_bool())
            return resolve(c.lit_value().as_bool() ? e.args()[1] : e.args()[2], ctx, depth);
        return Expr::op("ite", {c, resolve(e.args()[1], ctx, depth),
                                resolve(e.args()[2], ctx, depth)});
    }
    std::vector<Expr> rs;
    rs.reserve(e.args().size());
    for (const Expr& a : e.args()) rs.push_back(resolve(a, ctx, depth));
    if (op == "size" && rs.size() == 1) {
        const Expr& a = rs[0];
        if (a.kind() == Expr::Kind::Lit && a.lit_value().is_list())
            return Expr::lit(Value::integer(static_cast<std::int64_t>(a.lit_value().as_list().size())));
        if (a.kind() == Expr::Kind::Op && a.op_name() == "append" && a.args().size() == 2)
            return fold(Expr::op("+", {resolve(Expr::op("size", {a.args()[0]}), ctx, depth),
                                       Expr::lit(Value::integer(1))}));
        if (a.kind() == Expr::Kind::Op && a.op_name() == "tail" && a.args().size() == 1)
            return fold(Expr::op("-", {resolve(Expr::op("size", {a.args()[0]}), ctx, depth),
                                       Expr::lit(Value::integer(1))}));
    }
    return fold(Expr::op(op, std::move(rs)));
}

PureAtom impossible_atom() {
    PureAtom a;
    a.kind = PureAtom::Kind::LtZ; // 0 < 0
    return a;
}

// `r` must already be resolved.
void norm_bool_raw(const Expr& r, bool polarity, std::vector<PureAtom>& out) {
    switch (r.kind()) {
    case Expr::Kind::Lit:
        if (r.lit_value().is_bool() && r.lit_value().as_bool() == polarity) return;
        out.push_back(impossible_atom());
        return;
    case Expr::Kind::Not:
        norm_bool_raw(r.args()[0], !polarity, out);
        return;
    case Expr::Kind::Eq: {
        const Expr& a = r.args()[0];
        const Expr& b = r.args()[1];
        // Equality against a boolean literal asserts the other side itself.
        if (a.kind() == Expr::Kind::Lit && a.lit_value().is_bool()) {
            norm_bool_raw(b, a.lit_value().as_bool() ? polarity : !polarity, out);
            return;
        }
        if (b.kind() == Expr::Kind::Lit && b.lit_value().is_bool()) {
            norm_bool_raw(a, b.lit_value().as_bool() ? polarity : !polarity, out);
            return;
        }
        PureAtom at;
        at.kind = polarity ? PureAtom::Kind::EqZ : PureAtom::Kind::NeZ;
        at.lin = norm_raw(a);
        at.lin.add(norm_raw(b), Rational(-1));
        out.push_back(at);
        return;
    }
    case Expr::Kind::Op:
        if (r.op_name() == "<" && r.args().size() == 2) {
            PureAtom at;
            at.kind = PureAtom::Kind::LtZ;
            if (polarity) {
                at.lin = norm_raw(r.args()[0]);
                at.lin.add(norm_raw(r.args()[1]), Rational(-1));
            } else {
                // over integers, !(a < b) is b - a - 1 < 0
                at.lin = norm_raw(r.args()[1]);
                at.lin.add(norm_raw(r.args()[0]), Rational(-1));
                at.lin.cst -= Rational(1);
            }
            out.push_back(at);
            return;
        }
        [[fallthrough]];
    case Expr::Kind::Var: {
        // An opaque boolean term equals 1 (true) or 0 (false).
        PureAtom at;
        at.kind = PureAtom::Kind::EqZ;
        at.lin = norm_raw(r);
        at.lin.cst -= Rational(polarity ? 1 : 0);
        out.push_back(at);
        return;
    }
    }
}

AArg freshen_arg(const AArg& a, std::uint64_t& counter) {
    if (!a.wild) return a;
    return AArg::of(Expr::var("?" + std::to_string(counter++)));
}

AssertionPtr freshen_atom(const AssertionPtr& a, std::uint64_t& counter) {
    auto c = std::make_shared<Assertion>(*a);
    switch (c->kind) {
    case Assertion::Kind::PointsTo:
        c->a1 = freshen_arg(c->a1, counter);
        c->a2 = freshen_arg(c->a2, counter);
        break;
    case Assertion::Kind::UninitCell:
    case Assertion::Kind::UninitSigPart:
        c->a1 = freshen_arg(c->a1, counter);
        break;
    case Assertion::Kind::MutexPart:
    case Assertion::Kind::LockedPart:
        c->a1 = freshen_arg(c->a1, counter);
        c->a2 = freshen_arg(c->a2, counter);
        break;
    case Assertion::Kind::SignalPart:
        c->a1 = freshen_arg(c->a1, counter);
        c->a2 = freshen_arg(c->a2, counter);
        c->a3 = freshen_arg(c->a3, counter);
        break;
    default:
        break;
    }
    return c;
}

// Argument match: a wildcard in the target matches anything; otherwise the
// two expressions must be provably equal in the case.
bool arg_matches(const PureCtx& px, const StateCase& ctx, const AArg& have, const AArg& want) {
    if (want.wild) return true;
    if (have.wild) return false;
    return exprs_match(px, ctx, have.e, want.e);
}

bool chunk_matches(const PureCtx& px, const StateCase& ctx, const AssertionPtr& have,
                   const AssertionPtr& want) {
    if (have->kind != want->kind) return false;
    switch (want->kind) {
    case Assertion::Kind::PointsTo:
        return arg_matches(px, ctx, have->a1, want->a1) &&
               arg_matches(px, ctx, have->a2, want->a2);
    case Assertion::Kind::UninitCell:
    case Assertion::Kind::UninitSigPart:
        return arg_matches(px, ctx, have->a1, want->a1);
    case Assertion::Kind::MutexPart:
        return have->inv_name == want->inv_name &&
               arg_matches(px, ctx, have->a1, want->a1) &&
               arg_matches(px, ctx, have->a2, want->a2);
    case Assertion::Kind::LockedPart:
        if (have->inv_name != want->inv_name) return false;
        if (!arg_matches(px, ctx, have->a1, want->a1) ||
            !arg_matches(px, ctx, have->a2, want->a2))
            return false;
        if (want->held_wild) return true;
        return !have->held_wild && have->held == want->held;
    case Assertion::Kind::SignalPart:
        return arg_matches(px, ctx, have->a1, want->a1) &&
               arg_matches(px, ctx, have->a2, want->a2) &&
               arg_matches(px, ctx, have->a3, want->a3);
    default:
        return false;
    }
}

AssertionPtr atom_with_frac(const AssertionPtr& a, const Rational& q) {
    auto c = std::make_shared<Assertion>(*a);
    c->frac = Fraction(q);
    return c;
}

} // namespace

void LinForm::add(const LinForm& o, const Rational& k) {
    const LinForm copy = (&o == this) ? o : LinForm{};
    const LinForm& src = (&o == this) ? copy : o;
    for (const auto& [dim, c] : src.coeffs) {
        Rational& slot = coeffs[dim];
        slot += c * k;
        if (slot.is_zero()) coeffs.erase(dim);
    }
    cst += src.cst * k;
}

std::string LinForm::str() const {
    std::string s;
    for (const auto& [dim, c] : coeffs) s += c.str() + "*" + dim + " + ";
    return s + cst.str();
}

std::string PureAtom::str() const {
    switch (kind) {
    case Kind::EqZ:
        return lin.str() + " = 0";
    case Kind::NeZ:
        return lin.str() + " != 0";
    case Kind::LtZ:
        return lin.str() + " < 0";
    }
    return "?";
}

std::string StateCase::str() const {
    std::string s;
    for (const auto& [v, e] : defs) s += "[" + v + " := " + e.str() + "] ";
    for (const Expr& p : pures) s += "pure(" + p.str() + ") ** ";
    for (const AssertionPtr& c : chunks) s += c->str() + " ** ";
    return s + Assertion::obs_of(obs)->str();
}

std::string canon_key(const Expr& e, const StateCase* ctx) {
    return norm_raw(resolve(e, ctx, kResolveDepth)).str();
}

LinForm norm_lin(const Expr& e, const StateCase* ctx) {
    return norm_raw(resolve(e, ctx, kResolveDepth));
}

std::vector<PureAtom> norm_bool(const Expr& e, bool polarity, const StateCase* ctx) {
    std::vector<PureAtom> out;
    norm_bool_raw(resolve(e, ctx, kResolveDepth), polarity, out);
    return out;
}

PureCtx::PureCtx(const StateCase& c) : case_(&c) {
    std::vector<PureAtom> atoms;
    for (const Expr& p : c.pures) {
        auto more = norm_bool(p, true, &c);
        atoms.insert(atoms.end(), more.begin(), more.end());
    }

    // Phase 1: equalities become the elimination basis.
    for (const PureAtom& a : atoms) {
        if (a.kind != PureAtom::Kind::EqZ) continue;
        LinForm f = reduce(a.lin);
        if (f.closed()) {
            if (!f.cst.is_zero()) unsat_ = true;
            continue;
        }
        auto it = f.coeffs.begin();
        std::string pivot = it->first;
        Rational k = it->second;
        LinForm rhs; // pivot = -(f - k*pivot)/k
        rhs.add(f, Rational(-1) / k);
        rhs.coeffs.erase(pivot);
        if (rhs.closed() && !rhs.cst.is_integer()) unsat_ = true;
        basis_.emplace_back(std::move(pivot), std::move(rhs));
    }

    // Phase 2: the remaining atoms become facts; closed ones are decided now
    // and univariate strict bounds tighten per-dimension integer intervals.
    for (const PureAtom& a : atoms) {
        if (a.kind == PureAtom::Kind::EqZ) continue;
        PureAtom r = a;
        r.lin = reduce(r.lin);
        if (r.lin.closed()) {
            bool holds = (r.kind == PureAtom::Kind::NeZ) ? !r.lin.cst.is_zero()
                                                         : r.lin.cst < Rational(0);
            if (!holds) unsat_ = true;
            continue;
        }
        if (r.kind == PureAtom::Kind::LtZ && r.lin.coeffs.size() == 1) {
            const auto& [dim, coeff] = *r.lin.coeffs.begin();
            Rational t = -r.lin.cst / coeff; // a*d + c < 0 boundary at d = t
            auto& [lo, hi] = bounds_[dim];
            if (coeff > Rational(0)) { // d < t
                std::int64_t h = t.is_integer() ? t.num() - 1 : floor_rat(t);
                if (!hi || *hi > Rational(h)) hi = Rational(h);
            } else { // d > t
                std::int64_t l = t.is_integer() ? t.num() + 1 : ceil_rat(t);
                if (!lo || *lo < Rational(l)) lo = Rational(l);
            }
        }
        facts_.push_back(std::move(r));
    }

    for (const auto& [dim, b] : bounds_)
        if (b.first && b.second && *b.first > *b.second) unsat_ = true;

    // Opposed proportional strict facts: L < 0 and L = k*M + r with k < 0
    // and M < 0 force L > r, so r >= 0 is a contradiction.
    for (std::size_t i = 0; i < facts_.size() && !unsat_; ++i) {
        if (facts_[i].kind != PureAtom::Kind::LtZ) continue;
        for (std::size_t j = i + 1; j < facts_.size(); ++j) {
            if (facts_[j].kind != PureAtom::Kind::LtZ) continue;
            auto k = proportion(facts_[i].lin, facts_[j].lin);
            if (!k || !(*k < Rational(0))) continue;
            Rational r = facts_[i].lin.cst - *k * facts_[j].lin.cst;
            if (!(r < Rational(0))) unsat_ = true;
        }
    }
}

LinForm PureCtx::reduce(LinForm f) const {
    for (int pass = 0; pass < 64; ++pass) {
        bool changed = false;
        for (const auto& [pivot, rhs] : basis_) {
            auto it = f.coeffs.find(pivot);
            if (it == f.coeffs.end()) continue;
            Rational k = it->second;
            f.coeffs.erase(it);
            f.add(rhs, k);
            changed = true;
        }
        if (!changed) break;
    }
    return f;
}

std::optional<Rational> PureCtx::proportion(const LinForm& a, const LinForm& b) {
    if (a.coeffs.empty() || a.coeffs.size() != b.coeffs.size()) return std::nullopt;
    std::optional<Rational> k;
    auto ia = a.coeffs.begin();
    auto ib = b.coeffs.begin();
    for (; ia != a.coeffs.end(); ++ia, ++ib) {
        if (ia->first != ib->first) return std::nullopt;
        Rational q = ia->second / ib->second;
        if (k && !(*k == q)) return std::nullopt;
        k = q;
    }
    return k;
}

std::optional<Rational> PureCtx::interval_end(const LinForm& f, bool upper) const {
    Rational acc = f.cst;
    for (const auto& [dim, c] : f.coeffs) {
        auto it = bounds_.find(dim);
        if (it == bounds_.end()) return std::nullopt;
        const auto& [lo, hi] = it->second;
        bool need_hi = upper == (c > Rational(0));
        const std::optional<Rational>& end = need_hi ? hi : lo;
        if (!end) return std::nullopt;
        acc += c * *end;
    }
    return acc;
}

bool PureCtx::known_lt(const LinForm& goal) const {
    for (const PureAtom& f : facts_) {
        if (f.kind != PureAtom::Kind::LtZ) continue;
        auto k = proportion(goal, f.lin);
        if (!k || !(*k > Rational(0))) continue;
        Rational r = goal.cst - *k * f.lin.cst;
        // fact < 0 over integers means fact <= -1, so goal <= -k + r.
        if (r < *k) return true;
    }
    if (auto hi = interval_end(goal, true); hi && *hi < Rational(0)) return true;
    return false;
}

bool PureCtx::proves(PureAtom goal) const {
    if (unsat_) return true;
    goal.lin = reduce(goal.lin);
    switch (goal.kind) {
    case PureAtom::Kind::EqZ: {
        if (goal.lin.closed()) return goal.lin.cst.is_zero();
        auto lo = interval_end(goal.lin, false);
        auto hi = interval_end(goal.lin, true);
        return lo && hi && lo->is_zero() && hi->is_zero();
    }
    case PureAtom::Kind::NeZ: {
        if (goal.lin.closed()) return !goal.lin.cst.is_zero();
        for (const PureAtom& f : facts_) {
            if (f.kind != PureAtom::Kind::NeZ) continue;
            auto k = proportion(goal.lin, f.lin);
            if (k && goal.lin.cst == *k * f.lin.cst && !k->is_zero()) return true;
        }
        auto lo = interval_end(goal.lin, false);
        auto hi = interval_end(goal.lin, true);
        if (hi && *hi < Rational(0)) return true;
        if (lo && *lo > Rational(0)) return true;
        if (goal.lin.coeffs.size() == 1) {
            const auto& [dim, coeff] = *goal.lin.coeffs.begin();
            Rational root = -goal.lin.cst / coeff;
            if (!root.is_integer()) return true;
            auto it = bounds_.find(dim);
            if (it != bounds_.end()) {
                const auto& [blo, bhi] = it->second;
                if (bhi && *bhi < root) return true;
                if (blo && *blo > root) return true;
            }
        }
        return false;
    }
    case PureAtom::Kind::LtZ:
        if (goal.lin.closed()) return goal.lin.cst < Rational(0);
        return known_lt(goal.lin);
    }
    return false;
}

bool PureCtx::proves_expr(const Expr& e, bool polarity) const {
    for (const PureAtom& a : norm_bool(e, polarity, case_))
        if (!proves(a)) return false;
    return true;
}

bool case_unsat(const StateCase& c) { return PureCtx(c).unsat(); }

bool exprs_match(const PureCtx& px, const StateCase& c, const Expr& a, const Expr& b) {
    if (canon_key(a, &c) == canon_key(b, &c)) return true;
    PureAtom g;
    g.kind = PureAtom::Kind::EqZ;
    g.lin = norm_lin(a, &c);
    g.lin.add(norm_lin(b, &c), Rational(-1));
    return px.proves(g);
}

std::vector<StateCase> assertion_cases(const AssertionPtr& a, bool freshen,
                                       std::uint64_t& fresh_counter) {
    std::vector<StateCase> out;
    for (const AssertionPtr& disj : dnf_cases(a)) {
        StateCase sc;
        std::vector<AssertionPtr> atoms;
        flatten_star(disj, atoms);
        for (const AssertionPtr& at : atoms) {
            switch (at->kind) {
            case Assertion::Kind::Pure:
                sc.pures.push_back(at->pure);
                break;
            case Assertion::Kind::BoolLit:
                if (!at->bval) sc.pures.push_back(Expr::lit(Value::boolean(false)));
                break;
            case Assertion::Kind::Obs:
                sc.obs.insert(sc.obs.end(), at->obs.begin(), at->obs.end());
                break;
            case Assertion::Kind::Star:
            case Assertion::Kind::Or:
                break; // flattened / distributed away
            default:
                sc.chunks.push_back(freshen ? freshen_atom(at, fresh_counter) : at);
                break;
            }
        }
        out.push_back(std::move(sc));
    }
    return out;
}

bool case_carve(StateCase& c, const StateCase& target, std::string* why) {
    const StateCase orig = c; // matching resolves against the uncarved heap view
    PureCtx px(orig);
    if (px.unsat()) {
        c.chunks.clear();
        c.obs.clear();
        return true; // vacuous
    }
    for (const Expr& p : target.pures) {
        if (!px.proves_expr(p)) {
            if (why) *why = "unprovable pure: " + p.str();
            return false;
        }
    }
    for (const AssertionPtr& t : target.chunks) {
        Rational need = t->frac.value();
        Rational have(0);
        std::vector<std::size_t> idxs;
        for (std::size_t i = 0; i < c.chunks.size(); ++i) {
            if (chunk_matches(px, orig, c.chunks[i], t)) {
                idxs.push_back(i);
                have += c.chunks[i]->frac.value();
            }
        }
        if (have < need) {
            if (why)
                *why = "missing chunk: " + t->str() + " (available " + have.str() + ")";
            return false;
        }
        std::vector<AssertionPtr> next;
        next.reserve(c.chunks.size());
        std::size_t cursor = 0;
        for (std::size_t i = 0; i < c.chunks.size(); ++i) {
            if (cursor < idxs.size() && idxs[cursor] == i) {
                ++cursor;
                Rational q = c.chunks[i]->frac.value();
                Rational take = q < need ? q : need;
                need -= take;
                if (q - take > Rational(0)) next.push_back(atom_with_frac(c.chunks[i], q - take));
            } else {
                next.push_back(c.chunks[i]);
            }
        }
        c.chunks = std::move(next);
    }
    for (const ObsItem& o : target.obs) {
        auto it = std::find_if(c.obs.begin(), c.obs.end(), [&](const ObsItem& h) {
            return h.is_mutex == o.is_mutex && exprs_match(px, orig, h.target, o.target) &&
                   exprs_match(px, orig, h.level, o.level);
        });
        if (it == c.obs.end()) {
            if (why)
                *why = std::string("missing obligation: ") + (o.is_mutex ? "mut(" : "sig(") +
                       o.target.str() + ", " + o.level.str() + ")";
            return false;
        }
        c.obs.erase(it);
    }
    return true;
}

std::vector<StateCase> case_merge(const StateCase& c, const AssertionPtr& a,
                                  std::uint64_t& fresh_counter) {
    std::vector<StateCase> out;
    for (StateCase q : assertion_cases(a, true, fresh_counter)) {
        StateCase m = c;
        m.pures.insert(m.pures.end(), q.pures.begin(), q.pures.end());
        m.chunks.insert(m.chunks.end(), q.chunks.begin(), q.chunks.end());
        m.obs.insert(m.obs.end(), q.obs.begin(), q.obs.end());
        out.push_back(std::move(m));
    }
    return out;
}

std::optional<std::string> entail(const std::vector<StateCase>& P, const AssertionPtr& Q) {
    std::uint64_t dummy = 0;
    std::vector<StateCase> qcases = assertion_cases(Q, false, dummy);
    for (const StateCase& p : P) {
        if (case_unsat(p)) continue;
        bool matched = false;
        std::string last = "no disjunct applies";
        for (const StateCase& q : qcases) {
            StateCase copy = p;
            std::string w;
            if (!case_carve(copy, q, &w)) {
                last = w;
                continue;
            }
            if (!copy.obs.empty()) {
                last = "leftover obligations: " + Assertion::obs_of(copy.obs)->str();
                continue;
            }
            matched = true;
            break;
        }
        if (!matched)
            return "state " + p.str() + " does not establish " + Q->str() + " (" + last + ")";
    }
    return std::nullopt;
}

void case_subst_var(StateCase& c, const std::string& var, const Expr& repl) {
    for (Expr& p : c.pures) p = p.substitute_expr(var, repl);
    for (AssertionPtr& ch : c.chunks) ch = assertion_subst_var(ch, var, repl);
    for (ObsItem& o : c.obs) {
        o.target = o.target.substitute_expr(var, repl);
        o.level = o.level.substitute_expr(var, repl);
    }
    for (auto& [name, def] : c.defs) def = def.substitute_expr(var, repl);
}

} // namespace gsv
