#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gsv/assertion.hpp"
#include "gsv/rational.hpp"

namespace gsv {

// Canonical linear form of an integer-valued expression: rational
// coefficients over dimensions (variables and opaque subterms, each keyed
// by a canonical string) plus a constant. Two expressions are treated as
// equal exactly when their forms coincide.
struct LinForm {
    std::map<std::string, Rational> coeffs;
    Rational cst;

    bool closed() const { return coeffs.empty(); }
    void add(const LinForm& o, const Rational& k);
    bool operator==(const LinForm& o) const { return coeffs == o.coeffs && cst == o.cst; }
    std::string str() const;
};

// One normalized constraint: a linear form compared against zero. Booleans
// are encoded numerically (true = 1, false = 0), so every pure fact lives in
// the same arithmetic namespace.
struct PureAtom {
    enum class Kind { EqZ, NeZ, LtZ };

    Kind kind = Kind::EqZ;
    LinForm lin;

    std::string str() const;
};

// One disjunct of a symbolic state: pure constraints, owned chunk atoms
// (never Star/Or/Pure/BoolLit), the held obligation multiset, and
// definitions for let-bound variables. Definition bodies are heap-stable
// (dereferences are resolved before a result is recorded), so expanding
// them during canonicalization is sound even after later writes.
struct StateCase {
    std::vector<Expr> pures;
    std::vector<AssertionPtr> chunks;
    std::vector<ObsItem> obs;
    std::map<std::string, Expr> defs;

    std::string str() const;
};

// Canonical key of `e`, resolving dereferences against the case's points-to
// chunks, folding closed subexpressions, and applying list-length laws
// (size(append(l, x)) = size(l) + 1, size(tail(l)) = size(l) - 1).
std::string canon_key(const Expr& e, const StateCase* ctx);
LinForm norm_lin(const Expr& e, const StateCase* ctx);
// Conjunction of atoms equivalent to `e == polarity`.
std::vector<PureAtom> norm_bool(const Expr& e, bool polarity, const StateCase* ctx);

// Decision support over one case's pure constraints: Gaussian elimination
// over the equalities, literal matching, and integer interval bounds for
// univariate facts.
class PureCtx {
public:
    explicit PureCtx(const StateCase& c);

    bool unsat() const { return unsat_; }
    bool proves(PureAtom goal) const;
    bool proves_expr(const Expr& e, bool polarity = true) const;

private:
    LinForm reduce(LinForm f) const;
    bool known_lt(const LinForm& goal) const;
    static std::optional<Rational> proportion(const LinForm& a, const LinForm& b);
    std::optional<Rational> interval_end(const LinForm& f, bool upper) const;

    const StateCase* case_ = nullptr;
    std::vector<std::pair<std::string, LinForm>> basis_; // dim = rhs (dim eliminated)
    std::vector<PureAtom> facts_;                        // reduced NeZ / LtZ
    std::map<std::string, std::pair<std::optional<Rational>, std::optional<Rational>>>
        bounds_; // dim -> inclusive integer [lo, hi]
    bool unsat_ = false;
};

bool case_unsat(const StateCase& c);

// Expression equality inside a case: canonical keys coincide, or the pure
// context proves the difference is zero.
bool exprs_match(const PureCtx& px, const StateCase& c, const Expr& a, const Expr& b);

// DNF of an assertion into cases. With `freshen`, wildcard arguments are
// instantiated with fresh "?N" variables (resources joining a state name
// their contents); without it wildcards survive and match anything
// (entailment and carve targets).
std::vector<StateCase> assertion_cases(const AssertionPtr& a, bool freshen,
                                       std::uint64_t& fresh_counter);

// Proves the target's pures, removes its chunks (fractions subtract across
// equal chunks; wildcards match anything), and removes its obligations.
bool case_carve(StateCase& c, const StateCase& target, std::string* why = nullptr);

// Conjoins an assertion onto a case; Or nodes split the result.
std::vector<StateCase> case_merge(const StateCase& c, const AssertionPtr& a,
                                  std::uint64_t& fresh_counter);

// Every satisfiable case of P must match some case of Q: Q's pures provable,
// Q's chunks covered, and the obligation multisets exactly equal. Returns
// an explanation when the entailment fails.
std::optional<std::string> entail(const std::vector<StateCase>& P, const AssertionPtr& Q);

void case_subst_var(StateCase& c, const std::string& var, const Expr& repl);

} // namespace gsv
