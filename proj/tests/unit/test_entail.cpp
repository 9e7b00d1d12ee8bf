#include <doctest.h>

#include <string>
#include <vector>

#include "gsv/entail.hpp"
#include "gsv/parser.hpp"

using namespace gsv;

namespace {

Expr E(const std::string& s) { return parse_expr_text(s); }

AssertionPtr A(const std::string& s) { return parse_assertion_text(s, {}); }

// Single-case state from an assertion, wildcards freshened.
StateCase state_of(const std::string& s, std::uint64_t seed = 0) {
    std::uint64_t ctr = seed;
    auto cs = assertion_cases(A(s), true, ctr);
    REQUIRE(cs.size() == 1);
    return cs[0];
}

StateCase pure_state(const std::vector<std::string>& pures) {
    StateCase c;
    for (const auto& p : pures) c.pures.push_back(E(p));
    return c;
}

} // namespace

TEST_CASE("linear forms canonicalize arithmetic rearrangements") {
    CHECK(canon_key(E("(n + 1) - 1"), nullptr) == canon_key(E("n"), nullptr));
    CHECK(canon_key(E("n + n"), nullptr) == canon_key(E("2 + n + n - 2"), nullptr));
    CHECK(canon_key(E("3 + 4"), nullptr) == canon_key(E("7"), nullptr));
    CHECK(canon_key(E("a + b"), nullptr) == canon_key(E("b + a"), nullptr));
    CHECK(canon_key(E("n"), nullptr) != canon_key(E("m"), nullptr));
    CHECK(canon_key(E("size(x)"), nullptr) == canon_key(E("size(x + 0)"), nullptr));
}

TEST_CASE("dereferences resolve against points-to chunks") {
    StateCase c = state_of("fifo |-(1)-> f ** other |-(1/2)-> 7");
    CHECK(canon_key(E("[fifo]"), &c) == canon_key(E("f"), &c));
    CHECK(canon_key(E("size([fifo])"), &c) == canon_key(E("size(f)"), &c));
    CHECK(canon_key(E("[other] + 1"), &c) == canon_key(E("8"), &c));
    // unknown location stays opaque but still canonical
    CHECK(canon_key(E("[elsewhere]"), &c) == canon_key(E("[elsewhere]"), &c));
}

TEST_CASE("wildcard contents freshen into usable symbols") {
    StateCase c = state_of("fifo |-(1)-> _");
    REQUIRE(c.chunks.size() == 1);
    CHECK_FALSE(c.chunks[0]->a2.wild);
    // the fresh symbol makes [fifo] a stable dimension
    CHECK(canon_key(E("[fifo]"), &c) == canon_key(c.chunks[0]->a2.e, &c));
}

TEST_CASE("list length laws") {
    CHECK(canon_key(E("size(append(f, x))"), nullptr) == canon_key(E("size(f) + 1"), nullptr));
    CHECK(canon_key(E("size(tail(f))"), nullptr) == canon_key(E("size(f) - 1"), nullptr));
    CHECK(canon_key(E("size(append(tail(f), x))"), nullptr) == canon_key(E("size(f)"), nullptr));
    CHECK(canon_key(E("size(nil)"), nullptr) == canon_key(E("0"), nullptr));
}

TEST_CASE("ite with a decidable condition selects a branch") {
    CHECK(canon_key(E("ite(1 < 2, a, b)"), nullptr) == canon_key(E("a"), nullptr));
    CHECK(canon_key(E("ite(2 < 1, a, b)"), nullptr) == canon_key(E("b"), nullptr));
    StateCase c = state_of("pc |-(1)-> 90");
    CHECK(canon_key(E("ite([pc] + 10 = 100, 0, 99)"), &c) == canon_key(E("0"), &c));
}

TEST_CASE("closed facts decide directly") {
    PureCtx px(pure_state({}));
    CHECK(px.proves_expr(E("1 < 2")));
    CHECK(px.proves_expr(E("2 = 2")));
    CHECK(px.proves_expr(E("2 != 3")));
    CHECK_FALSE(px.proves_expr(E("2 < 1")));
    CHECK_FALSE(px.proves_expr(E("n < n + 1"), false));
    CHECK(px.proves_expr(E("n < n + 1")));
    CHECK(px.proves_expr(E("n + 1 = 1 + n")));
}

TEST_CASE("equalities eliminate through substitution") {
    PureCtx px(pure_state({"x = y + 3", "y = 2"}));
    CHECK(px.proves_expr(E("x = 5")));
    CHECK(px.proves_expr(E("x != 4")));
    CHECK(px.proves_expr(E("4 < x")));
    CHECK_FALSE(px.proves_expr(E("x = 6")));
}

TEST_CASE("strict bounds give integer reasoning") {
    PureCtx px(pure_state({"0 < n"}));
    CHECK(px.proves_expr(E("0 < n + 5")));
    CHECK(px.proves_expr(E("n != 0")));
    CHECK(px.proves_expr(E("n != 0 - 3")));
    CHECK(px.proves_expr(E("0 - 1 < n - 1"))); // n >= 1
    CHECK_FALSE(px.proves_expr(E("0 < n - 1")));
    CHECK_FALSE(px.proves_expr(E("n != 1")));
}

TEST_CASE("negated comparisons flip into integer bounds") {
    PureCtx px(pure_state({"!(n < 10)"}));
    CHECK(px.proves_expr(E("9 < n")));
    CHECK(px.proves_expr(E("n != 9")));
    CHECK_FALSE(px.proves_expr(E("10 < n")));
}

TEST_CASE("list length bounds flow through the laws") {
    StateCase c = state_of("fifo |-(1)-> f ** pure(size(f) < 10) ** pure(0 - 1 < size(f))");
    PureCtx px(c);
    CHECK(px.proves_expr(E("size(f) != 10")));
    CHECK(px.proves_expr(E("size(append(f, x)) < 11")));
    CHECK(px.proves_expr(E("0 - 1 < size(append(f, x)) - 1")));
    CHECK(px.proves_expr(E("size([fifo]) < 10")));
    CHECK_FALSE(px.proves_expr(E("size(tail(f)) < 8")));
}

TEST_CASE("boolean facts match by polarity") {
    PureCtx yes(pure_state({"b"}));
    CHECK(yes.proves_expr(E("b")));
    CHECK(yes.proves_expr(E("!b"), false));
    CHECK_FALSE(yes.proves_expr(E("b"), false));

    CHECK(case_unsat(pure_state({"b", "!b"})));
    CHECK(case_unsat(pure_state({"false"})));
    CHECK(case_unsat(pure_state({"n = 1", "1 < n"})));
    CHECK(case_unsat(pure_state({"n < 3", "5 < n"})));
    CHECK(case_unsat(pure_state({"x < y", "y < x"})));
    CHECK_FALSE(case_unsat(pure_state({"n = 1", "0 < n"})));
}

TEST_CASE("an unsatisfiable case proves anything") {
    PureCtx px(pure_state({"n = 1", "1 < n"}));
    CHECK(px.unsat());
    CHECK(px.proves_expr(E("0 = 1")));
}

TEST_CASE("equality between list terms is tracked opaquely") {
    PureCtx px(pure_state({"f = append(g, x)"}));
    CHECK(px.proves_expr(E("f = append(g, x)")));
    CHECK(px.proves_expr(E("append(g, x) = f"))); // symmetric key
    CHECK_FALSE(px.proves_expr(E("f = append(g, y)")));
}

TEST_CASE("assertion cases split on disjunction") {
    std::uint64_t ctr = 0;
    auto cs = assertion_cases(A("pure(n = 1) ** obs{} \\/ pure(1 < n) ** obs{ sig(5, 7) }"),
                              false, ctr);
    REQUIRE(cs.size() == 2);
    CHECK(cs[0].obs.empty());
    REQUIRE(cs[1].obs.size() == 1);
    CHECK_FALSE(cs[1].obs[0].is_mutex);
}

TEST_CASE("carve subtracts fractions across equal chunks") {
    StateCase c = state_of("x |-(1/2)-> 7 ** x |-(1/2)-> 7 ** y |-(1)-> 0");

    SUBCASE("full target consumes both halves") {
        std::uint64_t ctr = 0;
        auto targets = assertion_cases(A("x |-(1)-> 7"), false, ctr);
        REQUIRE(case_carve(c, targets[0]));
        REQUIRE(c.chunks.size() == 1); // only y remains
        CHECK(c.chunks[0]->a1.e == E("y"));
    }

    SUBCASE("quarter target leaves the rest") {
        std::uint64_t ctr = 0;
        auto targets = assertion_cases(A("x |-(1/4)-> 7"), false, ctr);
        REQUIRE(case_carve(c, targets[0]));
        REQUIRE(c.chunks.size() == 3);
        CHECK(c.chunks[0]->frac == Fraction(1, 4));
        CHECK(c.chunks[1]->frac == Fraction(1, 2));
    }

    SUBCASE("too much fails with an explanation") {
        std::uint64_t ctr = 0;
        auto targets = assertion_cases(A("x |-(1)-> 8"), false, ctr);
        std::string why;
        CHECK_FALSE(case_carve(c, targets[0], &why));
        CHECK(why.find("missing chunk") != std::string::npos);
    }
}

TEST_CASE("wildcard targets match any argument") {
    StateCase c = state_of("x |-(1)-> 41 ** signal(s, 2, false)");
    std::uint64_t ctr = 0;
    auto targets = assertion_cases(A("x |-(1)-> _ ** signal(s, _, _)"), false, ctr);
    CHECK(case_carve(c, targets[0]));
    CHECK(c.chunks.empty());
}

TEST_CASE("carve matches chunk arguments up to arithmetic and derefs") {
    StateCase c = state_of("pc |-(1)-> n ** signal(102 - n, 112 - n, false)");
    std::uint64_t ctr = 0;
    auto targets = assertion_cases(A("signal(102 - [pc], 112 - [pc], false)"), false, ctr);
    CHECK(case_carve(c, targets[0]));
    CHECK(c.chunks.size() == 1);
}

TEST_CASE("carve removes obligations and reports missing ones") {
    StateCase c = state_of("obs{ sig(7, 3), mut(m, 0) }");
    std::uint64_t ctr = 0;
    auto t1 = assertion_cases(A("obs{ sig(7, 3) }"), false, ctr);
    REQUIRE(case_carve(c, t1[0]));
    REQUIRE(c.obs.size() == 1);
    CHECK(c.obs[0].is_mutex);

    std::string why;
    auto t2 = assertion_cases(A("obs{ sig(9, 9) }"), false, ctr);
    CHECK_FALSE(case_carve(c, t2[0], &why));
    CHECK(why.find("missing obligation") != std::string::npos);
}

TEST_CASE("pure targets must be provable") {
    StateCase c = state_of("pure(0 < n) ** x |-(1)-> n");
    std::uint64_t ctr = 0;
    std::string why;
    auto bad = assertion_cases(A("pure(1 < n)"), false, ctr);
    CHECK_FALSE(case_carve(c, bad[0], &why));
    CHECK(why.find("unprovable pure") != std::string::npos);
    auto good = assertion_cases(A("pure(0 - 1 < n) ** x |-(1/2)-> n"), false, ctr);
    CHECK(case_carve(c, good[0]));
}

TEST_CASE("entailment requires exact obligation multisets") {
    std::vector<StateCase> P{state_of("x |-(1)-> 1 ** obs{ sig(5, 7) }")};
    CHECK(entail(P, A("x |-(1)-> 1 ** obs{ sig(5, 7) }")) == std::nullopt);
    CHECK(entail(P, A("x |-(1/2)-> 1 ** obs{ sig(5, 7) }")) == std::nullopt); // chunks are affine

    auto leftover = entail(P, A("x |-(1)-> 1 ** obs{}"));
    REQUIRE(leftover.has_value());
    CHECK(leftover->find("leftover obligations") != std::string::npos);

    auto missing = entail(P, A("x |-(1)-> 1 ** obs{ sig(5, 7), sig(9, 9) }"));
    CHECK(missing.has_value());
}

TEST_CASE("entailment picks the right disjunct per case") {
    std::vector<StateCase> P{
        state_of("pure(n = 1) ** pc |-(1)-> n ** obs{}"),
        state_of("pure(1 < n) ** pc |-(1)-> n ** signal(102 - n, 112 - n, false) ** "
                 "obs{ sig(102 - n, 112 - n) }"),
    };
    auto q = A("pc |-(1)-> n ** (pure(n = 1) ** obs{} \\/ "
               "pure(1 < n) ** signal(102 - n, 112 - n, false) ** obs{ sig(102 - n, 112 - n) })");
    CHECK(entail(P, q) == std::nullopt);

    // swapping the guards breaks both cases
    auto qbad = A("pc |-(1)-> n ** (pure(1 < n) ** obs{} \\/ "
                  "pure(n = 1) ** signal(102 - n, 112 - n, false) ** obs{ sig(102 - n, 112 - n) })");
    CHECK(entail(P, qbad).has_value());
}

TEST_CASE("unsatisfiable source cases are vacuously entailed") {
    std::vector<StateCase> P{state_of("pure(n = 1) ** pure(1 < n) ** obs{ sig(1, 1) }")};
    CHECK(entail(P, A("pure(false) \\/ obs{}")) == std::nullopt);
}

TEST_CASE("merging an assertion splits on its disjuncts") {
    StateCase c = state_of("x |-(1)-> 1");
    std::uint64_t ctr = 10;
    auto out = case_merge(c, A("pure(a = 1) \\/ y |-(1)-> _"), ctr);
    REQUIRE(out.size() == 2);
    CHECK(out[0].pures.size() == 1);
    CHECK(out[0].chunks.size() == 1);
    CHECK(out[1].chunks.size() == 2);
    CHECK_FALSE(out[1].chunks[1]->a2.wild); // freshened
}

TEST_CASE("substitution rewrites pures, chunks, and obligations") {
    StateCase c = state_of("pure(0 < n) ** pc |-(1)-> n - 1 ** obs{ sig(102 - n, 112 - n) }");
    case_subst_var(c, "n", E("k + 1"));
    PureCtx px(pure_state({"0 < k + 1"}));
    CHECK(canon_key(c.chunks[0]->a2.e, nullptr) == canon_key(E("k"), nullptr));
    CHECK(canon_key(c.obs[0].target, nullptr) == canon_key(E("101 - k"), nullptr));
    CHECK(c.pures[0] == E("0 < k + 1"));
}

TEST_CASE("locked chunks match on invariant name and held fraction") {
    std::uint64_t ctr = 0;
    InvariantDecl inv{"I", A("true")};
    std::vector<InvariantDecl> table{inv};
    auto lk = parse_assertion_text("locked[1/2](m, 0, I, 1/2)", table);
    StateCase c;
    c.chunks.push_back(lk);

    auto twild = assertion_cases(parse_assertion_text("locked[1/2](m, 0, I, _)", table), false, ctr);
    StateCase c1 = c;
    CHECK(case_carve(c1, twild[0]));

    auto texact = assertion_cases(parse_assertion_text("locked[1/2](m, 0, I, 1/2)", table), false, ctr);
    StateCase c2 = c;
    CHECK(case_carve(c2, texact[0]));

    auto twrong = assertion_cases(parse_assertion_text("locked[1/2](m, 0, I, 1/4)", table), false, ctr);
    StateCase c3 = c;
    CHECK_FALSE(case_carve(c3, twrong[0]));
}

TEST_CASE("chunk matching uses pure equality facts, not just syntax") {
    // k is pinned to 1 by a pure fact, so a chunk holding k - 2 matches a
    // target asking for -1 even though the spellings differ.
    StateCase c = state_of("pure(k = 1) ** c |-(1)-> k - 2");
    std::uint64_t ctr = 0;
    auto t = assertion_cases(A("c |-(1)-> 0 - 1"), false, ctr);
    REQUIRE(t.size() == 1);
    StateCase c1 = c;
    CHECK(case_carve(c1, t[0]));
    CHECK(c1.chunks.empty());

    // location aliasing through an equality fact
    StateCase d = state_of("pure(p = q) ** p |-(1)-> 5");
    auto t2 = assertion_cases(A("q |-(1)-> 5"), false, ctr);
    StateCase d1 = d;
    CHECK(case_carve(d1, t2[0]));

    // without the fact the same carve must fail
    StateCase e = state_of("p |-(1)-> 5");
    StateCase e1 = e;
    CHECK_FALSE(case_carve(e1, t2[0]));
}

TEST_CASE("obligation matching uses pure facts too") {
    StateCase c = state_of("pure(n = 7) ** obs{ sig(100 - n, 3) }");
    std::uint64_t ctr = 0;
    auto t = assertion_cases(A("obs{ sig(93, 3) }"), false, ctr);
    StateCase c1 = c;
    CHECK(case_carve(c1, t[0]));
    CHECK(c1.obs.empty());
}
