#include "gsv/assertion.hpp"

#include <sstream>

namespace gsv {

namespace {

AssertionPtr make(Assertion a) { return std::make_shared<const Assertion>(std::move(a)); }

std::string frac_str(const Fraction& f) {
    const Rational& q = f.value();
    if (q.is_integer()) return std::to_string(q.num());
    return std::to_string(q.num()) + "/" + std::to_string(q.den());
}

} // namespace

AssertionPtr Assertion::bool_lit(bool b) {
    Assertion a;
    a.kind = Kind::BoolLit;
    a.bval = b;
    return make(std::move(a));
}

AssertionPtr Assertion::pure_of(Expr e) {
    Assertion a;
    a.kind = Kind::Pure;
    a.pure = std::move(e);
    return make(std::move(a));
}

AssertionPtr Assertion::points_to(AArg loc, AArg val, Fraction q) {
    Assertion a;
    a.kind = Kind::PointsTo;
    a.a1 = std::move(loc);
    a.a2 = std::move(val);
    a.frac = q;
    return make(std::move(a));
}

AssertionPtr Assertion::uninit_cell(AArg loc, Fraction q) {
    Assertion a;
    a.kind = Kind::UninitCell;
    a.a1 = std::move(loc);
    a.frac = q;
    return make(std::move(a));
}

AssertionPtr Assertion::mutex_part(AArg loc, AArg lev, std::string name, AssertionPtr body,
                                   Fraction q) {
    Assertion a;
    a.kind = Kind::MutexPart;
    a.a1 = std::move(loc);
    a.a2 = std::move(lev);
    a.inv_name = std::move(name);
    a.inv = std::move(body);
    a.frac = q;
    return make(std::move(a));
}

AssertionPtr Assertion::locked_part(AArg loc, AArg lev, std::string name, AssertionPtr body,
                                    bool held_wild, Fraction held, Fraction q) {
    Assertion a;
    a.kind = Kind::LockedPart;
    a.a1 = std::move(loc);
    a.a2 = std::move(lev);
    a.inv_name = std::move(name);
    a.inv = std::move(body);
    a.held_wild = held_wild;
    a.held = held;
    a.frac = q;
    return make(std::move(a));
}

AssertionPtr Assertion::signal_part(AArg id, AArg lev, AArg state, Fraction q) {
    Assertion a;
    a.kind = Kind::SignalPart;
    a.a1 = std::move(id);
    a.a2 = std::move(lev);
    a.a3 = std::move(state);
    a.frac = q;
    return make(std::move(a));
}

AssertionPtr Assertion::uninit_sig(AArg id, Fraction q) {
    Assertion a;
    a.kind = Kind::UninitSigPart;
    a.a1 = std::move(id);
    a.frac = q;
    return make(std::move(a));
}

AssertionPtr Assertion::obs_of(std::vector<ObsItem> items) {
    Assertion a;
    a.kind = Kind::Obs;
    a.obs = std::move(items);
    return make(std::move(a));
}

AssertionPtr Assertion::star(AssertionPtr x, AssertionPtr y) {
    Assertion a;
    a.kind = Kind::Star;
    a.kids.push_back(std::move(x));
    a.kids.push_back(std::move(y));
    return make(std::move(a));
}

AssertionPtr Assertion::star_all(std::vector<AssertionPtr> parts) {
    if (parts.empty()) return bool_lit(true);
    AssertionPtr acc = parts[0];
    for (std::size_t i = 1; i < parts.size(); ++i) acc = star(acc, parts[i]);
    return acc;
}

AssertionPtr Assertion::or_of(std::vector<AssertionPtr> disjuncts) {
    if (disjuncts.size() == 1) return disjuncts[0];
    Assertion a;
    a.kind = Kind::Or;
    a.kids = std::move(disjuncts);
    return make(std::move(a));
}

bool Assertion::operator==(const Assertion& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
    case Kind::BoolLit: return bval == o.bval;
    case Kind::Pure: return pure == o.pure;
    case Kind::PointsTo: return frac == o.frac && a1 == o.a1 && a2 == o.a2;
    case Kind::UninitCell: return frac == o.frac && a1 == o.a1;
    case Kind::MutexPart:
        return frac == o.frac && a1 == o.a1 && a2 == o.a2 && inv_name == o.inv_name &&
               assertion_equal(inv, o.inv);
    case Kind::LockedPart:
        return frac == o.frac && a1 == o.a1 && a2 == o.a2 && inv_name == o.inv_name &&
               assertion_equal(inv, o.inv) && held_wild == o.held_wild &&
               (held_wild || held == o.held);
    case Kind::SignalPart: return frac == o.frac && a1 == o.a1 && a2 == o.a2 && a3 == o.a3;
    case Kind::UninitSigPart: return frac == o.frac && a1 == o.a1;
    case Kind::Obs: return obs == o.obs;
    case Kind::Star:
    case Kind::Or: {
        if (kids.size() != o.kids.size()) return false;
        for (std::size_t i = 0; i < kids.size(); ++i) {
            if (!assertion_equal(kids[i], o.kids[i])) return false;
        }
        return true;
    }
    }
    return false;
}

bool Assertion::mentions(const std::string& var) const {
    switch (kind) {
    case Kind::BoolLit: return false;
    case Kind::Pure: return pure.mentions(var);
    case Kind::PointsTo: return a1.mentions(var) || a2.mentions(var);
    case Kind::UninitCell:
    case Kind::UninitSigPart: return a1.mentions(var);
    case Kind::MutexPart:
    case Kind::LockedPart:
        return a1.mentions(var) || a2.mentions(var) || assertion_mentions(inv, var);
    case Kind::SignalPart: return a1.mentions(var) || a2.mentions(var) || a3.mentions(var);
    case Kind::Obs:
        for (const auto& it : obs) {
            if (it.target.mentions(var) || it.level.mentions(var)) return true;
        }
        return false;
    case Kind::Star:
    case Kind::Or:
        for (const auto& k : kids) {
            if (assertion_mentions(k, var)) return true;
        }
        return false;
    }
    return false;
}

std::string Assertion::str() const {
    std::ostringstream out;
    auto tag = [&](const char* name) {
        out << name;
        if (!frac.is_full()) out << "[" << frac_str(frac) << "]";
    };
    switch (kind) {
    case Kind::BoolLit: out << (bval ? "true" : "false"); break;
    case Kind::Pure: out << "pure(" << pure.str() << ")"; break;
    case Kind::PointsTo:
        out << a1.str() << " |-(" << frac_str(frac) << ")-> " << a2.str();
        break;
    case Kind::UninitCell:
        tag("uninit");
        out << "(" << a1.str() << ")";
        break;
    case Kind::MutexPart:
        tag("mutex");
        out << "(" << a1.str() << ", " << a2.str() << ", " << inv_name << ")";
        break;
    case Kind::LockedPart:
        tag("locked");
        out << "(" << a1.str() << ", " << a2.str() << ", " << inv_name << ", "
            << (held_wild ? "_" : frac_str(held)) << ")";
        break;
    case Kind::SignalPart:
        tag("signal");
        out << "(" << a1.str() << ", " << a2.str() << ", " << a3.str() << ")";
        break;
    case Kind::UninitSigPart:
        tag("sig_uninit");
        out << "(" << a1.str() << ")";
        break;
    case Kind::Obs: {
        out << "obs{";
        bool first = true;
        for (const auto& it : obs) {
            if (!first) out << ", ";
            out << (it.is_mutex ? "mut(" : "sig(") << it.target.str() << ", " << it.level.str()
                << ")";
            first = false;
        }
        out << "}";
        break;
    }
    case Kind::Star:
        out << "(" << kids[0]->str() << " ** " << kids[1]->str() << ")";
        break;
    case Kind::Or: {
        out << "(";
        bool first = true;
        for (const auto& k : kids) {
            if (!first) out << " \\/ ";
            out << k->str();
            first = false;
        }
        out << ")";
        break;
    }
    }
    return out.str();
}

bool assertion_equal(const AssertionPtr& a, const AssertionPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return *a == *b;
}

bool assertion_mentions(const AssertionPtr& a, const std::string& var) {
    return a && a->mentions(var);
}

AssertionPtr assertion_substitute(const AssertionPtr& a, const std::string& var, const Value& v) {
    if (!a || !a->mentions(var)) return a;
    Assertion out = *a;
    switch (a->kind) {
    case Assertion::Kind::BoolLit: break;
    case Assertion::Kind::Pure:
        out.pure = a->pure.substitute(var, v);
        break;
    case Assertion::Kind::PointsTo:
        out.a1 = a->a1.substitute(var, v);
        out.a2 = a->a2.substitute(var, v);
        break;
    case Assertion::Kind::UninitCell:
    case Assertion::Kind::UninitSigPart:
        out.a1 = a->a1.substitute(var, v);
        break;
    case Assertion::Kind::MutexPart:
    case Assertion::Kind::LockedPart:
        out.a1 = a->a1.substitute(var, v);
        out.a2 = a->a2.substitute(var, v);
        out.inv = assertion_substitute(a->inv, var, v);
        break;
    case Assertion::Kind::SignalPart:
        out.a1 = a->a1.substitute(var, v);
        out.a2 = a->a2.substitute(var, v);
        out.a3 = a->a3.substitute(var, v);
        break;
    case Assertion::Kind::Obs:
        for (auto& it : out.obs) {
            it.target = it.target.substitute(var, v);
            it.level = it.level.substitute(var, v);
        }
        break;
    case Assertion::Kind::Star:
    case Assertion::Kind::Or:
        for (auto& k : out.kids) k = assertion_substitute(k, var, v);
        break;
    }
    return std::make_shared<const Assertion>(std::move(out));
}

namespace {
AArg aarg_subst_expr(const AArg& a, const std::string& var, const Expr& repl) {
    if (a.wild) return a;
    return AArg::of(a.e.substitute_expr(var, repl));
}
} // namespace

AssertionPtr assertion_subst_var(const AssertionPtr& a, const std::string& var,
                                 const Expr& repl) {
    if (!a || !a->mentions(var)) return a;
    Assertion out = *a;
    switch (a->kind) {
    case Assertion::Kind::BoolLit: break;
    case Assertion::Kind::Pure:
        out.pure = a->pure.substitute_expr(var, repl);
        break;
    case Assertion::Kind::PointsTo:
        out.a1 = aarg_subst_expr(a->a1, var, repl);
        out.a2 = aarg_subst_expr(a->a2, var, repl);
        break;
    case Assertion::Kind::UninitCell:
    case Assertion::Kind::UninitSigPart:
        out.a1 = aarg_subst_expr(a->a1, var, repl);
        break;
    case Assertion::Kind::MutexPart:
    case Assertion::Kind::LockedPart:
        out.a1 = aarg_subst_expr(a->a1, var, repl);
        out.a2 = aarg_subst_expr(a->a2, var, repl);
        out.inv = assertion_subst_var(a->inv, var, repl);
        break;
    case Assertion::Kind::SignalPart:
        out.a1 = aarg_subst_expr(a->a1, var, repl);
        out.a2 = aarg_subst_expr(a->a2, var, repl);
        out.a3 = aarg_subst_expr(a->a3, var, repl);
        break;
    case Assertion::Kind::Obs:
        for (auto& it : out.obs) {
            it.target = it.target.substitute_expr(var, repl);
            it.level = it.level.substitute_expr(var, repl);
        }
        break;
    case Assertion::Kind::Star:
    case Assertion::Kind::Or:
        for (auto& k : out.kids) k = assertion_subst_var(k, var, repl);
        break;
    }
    return std::make_shared<const Assertion>(std::move(out));
}

void flatten_star(const AssertionPtr& a, std::vector<AssertionPtr>& out) {
    if (!a) return;
    if (a->kind == Assertion::Kind::Star) {
        flatten_star(a->kids[0], out);
        flatten_star(a->kids[1], out);
        return;
    }
    if (a->kind == Assertion::Kind::BoolLit && a->bval) return;
    out.push_back(a);
}

bool is_or_free(const AssertionPtr& a) {
    if (!a) return true;
    if (a->kind == Assertion::Kind::Or) return false;
    if (a->kind == Assertion::Kind::Star) {
        return is_or_free(a->kids[0]) && is_or_free(a->kids[1]);
    }
    return true;
}

std::vector<AssertionPtr> dnf_cases(const AssertionPtr& a) {
    if (!a) return {Assertion::bool_lit(true)};
    switch (a->kind) {
    case Assertion::Kind::Or: {
        std::vector<AssertionPtr> out;
        for (const auto& k : a->kids) {
            auto sub = dnf_cases(k);
            out.insert(out.end(), sub.begin(), sub.end());
        }
        return out;
    }
    case Assertion::Kind::Star: {
        std::vector<AssertionPtr> out;
        for (const auto& l : dnf_cases(a->kids[0])) {
            for (const auto& r : dnf_cases(a->kids[1])) {
                out.push_back(Assertion::star(l, r));
            }
        }
        return out;
    }
    default: return {a};
    }
}

} // namespace gsv
