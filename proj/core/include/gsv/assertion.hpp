#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gsv/cmd.hpp"
#include "gsv/expr.hpp"
#include "gsv/foundations.hpp"

namespace gsv {

// Chunk argument: an expression or the wildcard "_", which matches any value.
struct AArg {
    bool wild = false;
    Expr e;

    static AArg wildcard() {
        AArg a;
        a.wild = true;
        return a;
    }
    static AArg of(Expr x) {
        AArg a;
        a.e = std::move(x);
        return a;
    }

    bool operator==(const AArg& o) const {
        return wild == o.wild && (wild || e == o.e);
    }
    bool mentions(const std::string& var) const { return !wild && e.mentions(var); }
    AArg substitute(const std::string& var, const Value& v) const {
        if (wild) return *this;
        return of(e.substitute(var, v));
    }
    std::string str() const { return wild ? "_" : e.str(); }
};

// One obligation inside an obs{...} atom.
struct ObsItem {
    bool is_mutex = false;
    Expr target; // signal id or mutex location
    Expr level;

    bool operator==(const ObsItem& o) const {
        return is_mutex == o.is_mutex && target == o.target && level == o.level;
    }
};

// Assertions of the program logic. Star is separating conjunction; Or is an
// n-ary disjunction (a two-way "or" parses into a two-element Or).
//
//   BoolLit      true / false
//   Pure         pure(e)
//   PointsTo     e |-(q)-> v        (value may be _)
//   UninitCell   uninit[q](e)
//   MutexPart    mutex[q](e, lev, NAME)
//   LockedPart   locked[q](e, lev, NAME, f)   (f: held fraction or _)
//   SignalPart   signal[q](id, lev, state)    (args may be _)
//   UninitSigPart sig_uninit[q](id)
//   Obs          obs{ sig(e,e), mut(e,e), ... }
struct Assertion {
    enum class Kind {
        BoolLit,
        Pure,
        PointsTo,
        UninitCell,
        MutexPart,
        LockedPart,
        SignalPart,
        UninitSigPart,
        Obs,
        Star,
        Or,
    };

    Kind kind = Kind::BoolLit;
    bool bval = true;            // BoolLit
    Expr pure;                   // Pure
    Fraction frac;               // chunk coefficient [q], default 1
    AArg a1, a2, a3;             // chunk arguments (see table above)
    std::string inv_name;        // MutexPart / LockedPart
    AssertionPtr inv;            // resolved invariant body
    bool held_wild = false;      // LockedPart: held fraction is _
    Fraction held;               // LockedPart: held fraction
    std::vector<ObsItem> obs;    // Obs
    std::vector<AssertionPtr> kids; // Star (exactly 2) / Or (>= 1)

    static AssertionPtr bool_lit(bool b);
    static AssertionPtr pure_of(Expr e);
    static AssertionPtr points_to(AArg loc, AArg val, Fraction q = {});
    static AssertionPtr uninit_cell(AArg loc, Fraction q = {});
    static AssertionPtr mutex_part(AArg loc, AArg lev, std::string name, AssertionPtr body,
                                   Fraction q = {});
    static AssertionPtr locked_part(AArg loc, AArg lev, std::string name, AssertionPtr body,
                                    bool held_wild, Fraction held, Fraction q = {});
    static AssertionPtr signal_part(AArg id, AArg lev, AArg state, Fraction q = {});
    static AssertionPtr uninit_sig(AArg id, Fraction q = {});
    static AssertionPtr obs_of(std::vector<ObsItem> items);
    static AssertionPtr star(AssertionPtr a, AssertionPtr b);
    static AssertionPtr star_all(std::vector<AssertionPtr> parts);
    static AssertionPtr or_of(std::vector<AssertionPtr> disjuncts);

    bool operator==(const Assertion& o) const;
    bool mentions(const std::string& var) const;
    std::string str() const;
};

AssertionPtr assertion_substitute(const AssertionPtr& a, const std::string& var, const Value& v);

// Variable-for-expression substitution over every argument position.
AssertionPtr assertion_subst_var(const AssertionPtr& a, const std::string& var,
                                 const Expr& repl);

// Splits a star-tree into its atoms (Star nodes flattened, BoolLit true
// dropped). A BoolLit false atom is kept and fails any match.
void flatten_star(const AssertionPtr& a, std::vector<AssertionPtr>& out);

// True if the assertion contains no Or node (a single DNF case).
bool is_or_free(const AssertionPtr& a);

// Distributes all Or nodes to the top, yielding the DNF cases of `a`.
std::vector<AssertionPtr> dnf_cases(const AssertionPtr& a);

} // namespace gsv
