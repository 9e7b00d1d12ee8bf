#include <doctest.h>

#include <optional>
#include <string>
#include <vector>

#include "gsv/cmd.hpp"
#include "gsv/erase.hpp"
#include "gsv/expr.hpp"
#include "gsv/metrics.hpp"
#include "gsv/parser.hpp"
#include "gsv/printer.hpp"
#include "gsv/value.hpp"

using namespace gsv;

namespace {

std::optional<Value> ev(const std::string& text) {
    return eval_expr(parse_expr_text(text));
}

Value must(const std::string& text) {
    auto v = ev(text);
    REQUIRE(v.has_value());
    return *v;
}

// Parse, print, re-parse: the round trip must reproduce the same tree and
// printing must be a fixpoint.
void check_roundtrip(const std::string& text) {
    CAPTURE(text);
    Program p1 = parse_program(text);
    std::string s1 = print_program(p1);
    CAPTURE(s1);
    Program p2 = parse_program(s1);
    CHECK(cmd_equal(p1.main, p2.main));
    REQUIRE(p1.invariants.size() == p2.invariants.size());
    for (std::size_t i = 0; i < p1.invariants.size(); ++i) {
        CHECK(p1.invariants[i].name == p2.invariants[i].name);
        CHECK(*p1.invariants[i].body == *p2.invariants[i].body);
    }
    CHECK(print_program(p2) == s1);
}

void check_assertion_roundtrip(const std::string& text, const std::vector<InvariantDecl>& table) {
    CAPTURE(text);
    AssertionPtr a1 = parse_assertion_text(text, table);
    std::string s1 = a1->str();
    CAPTURE(s1);
    AssertionPtr a2 = parse_assertion_text(s1, table);
    CHECK(*a1 == *a2);
    CHECK(a2->str() == s1);
}

} // namespace

TEST_CASE("expression evaluation: arithmetic and comparison") {
    CHECK(must("1 + 2") == Value::integer(3));
    CHECK(must("2 - 5") == Value::integer(-3));
    CHECK(must("1 + 2 + 3") == Value::integer(6));
    CHECK(must("10 - 3 - 2") == Value::integer(5)); // left associative
    CHECK(must("1 < 2") == Value::boolean(true));
    CHECK(must("2 < 2") == Value::boolean(false));
    CHECK(must("0 - 3 < 0 - 2") == Value::boolean(true));
}

TEST_CASE("expression evaluation: equality is structural") {
    CHECK(must("3 = 3") == Value::boolean(true));
    CHECK(must("3 = 4") == Value::boolean(false));
    CHECK(must("3 = true") == Value::boolean(false)); // kind mismatch compares unequal
    CHECK(must("nil = nil") == Value::boolean(true));
    CHECK(must("append(nil, 1) = append(nil, 1)") == Value::boolean(true));
    CHECK(must("append(nil, 1) = nil") == Value::boolean(false));
    CHECK(must("3 != 4") == Value::boolean(true));
    CHECK(must("tt = tt") == Value::boolean(true));
}

TEST_CASE("expression evaluation: booleans and negation") {
    CHECK(must("!true") == Value::boolean(false));
    CHECK(must("!false") == Value::boolean(true));
    CHECK(must("!(1 = 2)") == Value::boolean(true));
    CHECK_FALSE(ev("!3").has_value()); // negation is only defined on booleans
}

TEST_CASE("expression evaluation: lists") {
    CHECK(must("size(nil)") == Value::integer(0));
    CHECK(must("size(append(nil, 7))") == Value::integer(1));
    CHECK(must("tail(append(append(nil, 1), 2))") == Value::list({Value::integer(2)}));
    CHECK_FALSE(ev("tail(nil)").has_value()); // tail of empty list is undefined
    CHECK(must("size(tail(append(nil, 1)))") == Value::integer(0));
}

TEST_CASE("expression evaluation: ite is lazy in its arms") {
    CHECK(must("ite(true, 1, 2)") == Value::integer(1));
    CHECK(must("ite(false, 1, 2)") == Value::integer(2));
    CHECK(must("ite(true, 5, tail(nil))") == Value::integer(5));
    CHECK(must("ite(false, tail(nil), 6)") == Value::integer(6));
    CHECK_FALSE(ev("ite(3, 1, 2)").has_value()); // condition must be boolean
}

TEST_CASE("expression evaluation: undefined cases") {
    CHECK_FALSE(ev("x").has_value()); // unbound variable
    CHECK_FALSE(ev("1 + true").has_value());
    CHECK_FALSE(ev("true < false").has_value());
    CHECK_FALSE(ev("size(3)").has_value());
}

TEST_CASE("expression evaluation: deref needs a reader") {
    Expr e = Expr::op("deref", {Expr::lit(Value::loc(HeapLoc{4}))});
    CHECK_FALSE(eval_expr(e).has_value());

    DerefFn reader = [](HeapLoc l) -> std::optional<Value> {
        if (l.idx == 4) return Value::integer(42);
        return std::nullopt;
    };
    auto v = eval_expr(e, &reader);
    REQUIRE(v.has_value());
    CHECK(*v == Value::integer(42));

    Expr miss = Expr::op("deref", {Expr::lit(Value::loc(HeapLoc{9}))});
    CHECK_FALSE(eval_expr(miss, &reader).has_value());
}

TEST_CASE("expression substitution and free variables") {
    Expr e = parse_expr_text("x + y");
    CHECK(e.mentions("x"));
    CHECK(e.mentions("y"));
    CHECK_FALSE(e.mentions("z"));
    CHECK_FALSE(e.is_closed());

    Expr e1 = e.substitute("x", Value::integer(1));
    CHECK_FALSE(e1.mentions("x"));
    CHECK(e1.mentions("y"));
    Expr e2 = e1.substitute("y", Value::integer(2));
    CHECK(e2.is_closed());
    auto v = eval_expr(e2);
    REQUIRE(v.has_value());
    CHECK(*v == Value::integer(3));
}

TEST_CASE("command substitution respects binders") {
    Program p = parse_program("let x = (5) in x + x");
    CmdPtr c = substitute(p.main, "x", Value::integer(9));
    // The binder shadows the substitution inside the body.
    CHECK(cmd_equal(c, p.main));

    Program q = parse_program("let y = (x) in x + y");
    CmdPtr c2 = substitute(q.main, "x", Value::integer(3));
    CHECK(c2->c1->e1 == Expr::lit(Value::integer(3)));  // bound command rewritten
    CHECK(c2->c2->e1.mentions("x") == false);           // body occurrence rewritten
    CHECK(c2->c2->e1.mentions("y"));                    // binder untouched
}

TEST_CASE("values are commands: as_value") {
    auto v = as_value(Cmd::expc(parse_expr_text("1 + 2")));
    REQUIRE(v.has_value());
    CHECK(*v == Value::integer(3));

    CHECK_FALSE(as_value(Cmd::expc(Expr::var("x"))).has_value());
    CHECK_FALSE(as_value(Cmd::alloc(Expr::lit(Value::integer(0)))).has_value());
    CHECK_FALSE(as_value(Cmd::expc(parse_expr_text("tail(nil)"))).has_value());
}

TEST_CASE("sequencing sugar parses to a wildcard let") {
    Program p = parse_program("cons(1); tt");
    REQUIRE(p.main->kind == Cmd::Kind::Let);
    CHECK(p.main->binder == "_");
    CHECK(p.main->c1->kind == Cmd::Kind::Alloc);
    CHECK(p.main->c2->kind == Cmd::Kind::Exp);
}

TEST_CASE("dereferences in program expressions are hoisted into reads") {
    Program p = parse_program("let x = (cons(1)) in [x] + 1");
    const Cmd& body = *p.main->c2;
    REQUIRE(body.kind == Cmd::Kind::Let);
    CHECK(body.binder.rfind("$d", 0) == 0); // fresh hoist binder
    CHECK(body.c1->kind == Cmd::Kind::Read);
    REQUIRE(body.c2->kind == Cmd::Kind::Exp);
    CHECK(body.c2->e1.mentions(body.binder));
}

TEST_CASE("write with a dereferencing right-hand side hoists the read first") {
    Program p = parse_program("let x = (cons(1)) in [x] := [x] + 1");
    const Cmd& body = *p.main->c2;
    REQUIRE(body.kind == Cmd::Kind::Let);
    CHECK(body.c1->kind == Cmd::Kind::Read);
    REQUIRE(body.c2->kind == Cmd::Kind::Write);
    CHECK(body.c2->e2.mentions(body.binder));
}

TEST_CASE("a bare bracket command is a read") {
    Program p = parse_program("let x = (cons(1)) in [x]");
    CHECK(p.main->c2->kind == Cmd::Kind::Read);
}

TEST_CASE("while condition commands may contain reads without hoisting brackets") {
    Program p = parse_program("let c = (cons(3)) in while ([c] != 0) do skip");
    const Cmd& w = *p.main->c2;
    REQUIRE(w.kind == Cmd::Kind::While);
    // The condition is a command, so the deref hoists inside it.
    REQUIRE(w.c1->kind == Cmd::Kind::Let);
    CHECK(w.c1->c1->kind == Cmd::Kind::Read);
    CHECK(w.anno.kind == LoopAnno::Kind::None);
}

TEST_CASE("loop bound annotations keep raw dereferences") {
    Program p = parse_program("let c = (cons(3)) in while ([c] != 0) do skip dec [c] + 1");
    const Cmd& w = *p.main->c2;
    REQUIRE(w.kind == Cmd::Kind::While);
    REQUIRE(w.anno.kind == LoopAnno::Kind::Dec);
    // The bound is ghost-evaluated, so its deref survives as an operator.
    CHECK(w.anno.dec.mentions("c"));
    bool has_deref = false;
    std::vector<Expr> stack{w.anno.dec};
    while (!stack.empty()) {
        Expr e = stack.back();
        stack.pop_back();
        if (e.kind() == Expr::Kind::Op && e.op_name() == "deref") has_deref = true;
        for (const Expr& a : e.args()) stack.push_back(a);
    }
    CHECK(has_deref);
}

TEST_CASE("await sugar expands to an annotated loop") {
    Program p = parse_program(
        "let flag = (cons(false)) in let m = (new_mutex) in "
        "with m await (let f = [flag] in f) awaiting { sig(0, 1) }");
    const Cmd& w = *p.main->c2->c2;
    REQUIRE(w.kind == Cmd::Kind::While);
    REQUIRE(w.anno.kind == LoopAnno::Kind::Await);
    CHECK(w.anno.mutex == Expr::var("m"));
    REQUIRE(w.anno.signals.size() == 1);
    CHECK(w.anno.signals[0].id == Expr::lit(Value::integer(0)));
    CHECK(w.anno.signals[0].level == Expr::lit(Value::integer(1)));
    // The loop condition is the acquire/run/release expansion.
    CHECK(cmd_equal(w.c1, await_expansion(w.anno.mutex, w.anno.body)));
}

TEST_CASE("await expansion has the acquire-run-release-negate shape") {
    CmdPtr body = Cmd::expc(Expr::var("f"));
    CmdPtr e = await_expansion(Expr::var("m"), body);
    REQUIRE(e->kind == Cmd::Kind::Let);
    CHECK(e->c1->kind == Cmd::Kind::Acquire);
    const Cmd& mid = *e->c2;
    REQUIRE(mid.kind == Cmd::Kind::Let);
    CHECK(mid.binder == "$r");
    CHECK(cmd_equal(mid.c1, body));
    const Cmd& rel = *mid.c2;
    REQUIRE(rel.kind == Cmd::Kind::Let);
    CHECK(rel.c1->kind == Cmd::Kind::Release);
    REQUIRE(rel.c2->kind == Cmd::Kind::Exp);
    CHECK(rel.c2->e1 == Expr::negate(Expr::var("$r")));
}

TEST_CASE("gated await expansion splices the gate before the release") {
    std::vector<AwaitItem> items{{Expr::lit(Value::integer(0)), Expr::lit(Value::integer(1))}};
    CmdPtr body = Cmd::expc(Expr::var("f"));
    CmdPtr e = await_expansion_gated(items, Expr::var("m"), body);
    const Cmd& mid = *e->c2;
    REQUIRE(mid.c2->kind == Cmd::Kind::Ghost);
    const GhostCmd& g = mid.c2->ghost;
    CHECK(g.kind == GhostCmd::Kind::AwaitGate);
    CHECK(g.a == Expr::var("$r"));
    REQUIRE(g.gate_items.size() == 1);
    CHECK(g.gate_mutex == Expr::var("m"));
    CHECK(mid.c2->c1->c1->kind == Cmd::Kind::Release);
}

TEST_CASE("round trips through the printer") {
    check_roundtrip("tt");
    check_roundtrip("1 + 2");
    check_roundtrip("let x = (cons(5)) in [x] := [x] + 1; [x]");
    check_roundtrip("if true then (cons(1); tt)");
    check_roundtrip("if (1 < 2) then (tt); 4");
    check_roundtrip("let c = (cons(3)) in while (let v = [c] in [c] := v - 1; 0 < v) do skip");
    check_roundtrip("let c = (cons(3)) in while ([c] != 0) do skip dec [c] + 1");
    check_roundtrip("let l = (cons(nil)) in [l] := append([l], 1); size([l]) = 1");
    check_roundtrip("ghost alloc_signal_id as i; ghost init_signal i at 2 as s; tt");
    check_roundtrip("ghost new_signal 3 as s; ghost set_signal s; tt");
    check_roundtrip("fork (cons(1); tt); tt");
    check_roundtrip("let m = (new_mutex) in acquire m; release m; tt");
    check_roundtrip("ite(1 = 2, 3, 4)");
    check_roundtrip("let x = (5) in ite(x = 5, x + 1, 0 - 1)");
}

TEST_CASE("round trip of a full annotated program") {
    check_roundtrip(
        "invariant FLAGINV = flag |-(1)-> _;\n"
        "let flag = (cons(false)) in\n"
        "let m = (new_mutex) in\n"
        "ghost alloc_signal_id as i;\n"
        "ghost init_signal i at 1 as s;\n"
        "ghost mut_init m at 0 with FLAGINV;\n"
        "fork (acquire m; [flag] := true; ghost set_signal s; release m; tt)\n"
        "  giving { mutex[1/2](m, 0, FLAGINV), obs{sig(s, 1)}, signal(s, 1, false) };\n"
        "with m await (let f = [flag] in f) awaiting { sig(s, 1) }");
}

TEST_CASE("assertion round trips") {
    std::vector<InvariantDecl> table;
    table.push_back({"INV", Assertion::points_to(AArg::of(Expr::var("flag")), AArg::wildcard())});

    check_assertion_roundtrip("true", table);
    check_assertion_roundtrip("false", table);
    check_assertion_roundtrip("pure(x + 1 = 2)", table);
    check_assertion_roundtrip("p |-(1/2)-> 5", table);
    check_assertion_roundtrip("p |-(1)-> _", table);
    check_assertion_roundtrip("uninit[1](p)", table);
    check_assertion_roundtrip("uninit(p)", table);
    check_assertion_roundtrip("mutex[1/2](m, 0, INV)", table);
    check_assertion_roundtrip("locked[1](m, 0, INV, 1/2)", table);
    check_assertion_roundtrip("locked(m, 0, INV, _)", table);
    check_assertion_roundtrip("signal[1](0, 1, false)", table);
    check_assertion_roundtrip("signal(0, 1, _)", table);
    check_assertion_roundtrip("sig_uninit(7)", table);
    check_assertion_roundtrip("obs{}", table);
    check_assertion_roundtrip("obs{sig(0, 1), mut(m, 2)}", table);
    check_assertion_roundtrip("(p |-(1)-> 5 ** obs{sig(0, 1)})", table);
    check_assertion_roundtrip("(pure(n = 1) \\/ (pure(1 < n) ** obs{sig(102 - n, 112 - n)}))",
                              table);
}

TEST_CASE("disjunction distributes over star in dnf_cases") {
    std::vector<InvariantDecl> table;
    AssertionPtr a = parse_assertion_text(
        "((pure(a = 1) \\/ pure(a = 2)) ** (pure(b = 1) \\/ pure(b = 2)))", table);
    auto cases = dnf_cases(a);
    CHECK(cases.size() == 4);
    for (auto& c : cases) CHECK(is_or_free(c));

    AssertionPtr flat = parse_assertion_text("(pure(a = 1) ** pure(b = 1))", table);
    CHECK(dnf_cases(flat).size() == 1);
}

TEST_CASE("flatten_star drops unit conjuncts") {
    std::vector<InvariantDecl> table;
    AssertionPtr a = parse_assertion_text("((true ** pure(x = 1)) ** (p |-(1)-> 2 ** true))",
                                          table);
    std::vector<AssertionPtr> atoms;
    flatten_star(a, atoms);
    CHECK(atoms.size() == 2);
}

TEST_CASE("erasing annotations removes ghost constructs") {
    Program p = parse_program(
        "invariant I = flag |-(1)-> _;\n"
        "let flag = (cons(false)) in let m = (new_mutex) in "
        "ghost new_signal 1 as s; ghost mut_init m at 0 with I; "
        "fork (acquire m; release m; tt) giving { mutex[1/2](m, 0, I) }; "
        "with m await (let f = [flag] in f) awaiting { sig(0, 1) }");
    CmdPtr plain = erase_annotations(p.main);

    // No ghost nodes, no annotations, no donations anywhere in the result.
    std::vector<CmdPtr> stack{plain};
    while (!stack.empty()) {
        CmdPtr c = stack.back();
        stack.pop_back();
        if (!c) continue;
        CHECK(c->kind != Cmd::Kind::Ghost);
        CHECK(c->kind != Cmd::Kind::WhileDecStarted);
        CHECK(c->kind != Cmd::Kind::AwaitStarted);
        if (c->kind == Cmd::Kind::While) CHECK(c->anno.kind == LoopAnno::Kind::None);
        if (c->kind == Cmd::Kind::Fork) CHECK(c->give == nullptr);
        stack.push_back(c->c1);
        stack.push_back(c->c2);
        if (c->anno.body) stack.push_back(c->anno.body);
    }

    CHECK(cmd_size(p.main) == cmd_size(plain));
    // Erasure is idempotent.
    CHECK(cmd_equal(erase_annotations(plain), plain));
}

TEST_CASE("erasing a plain command is the identity") {
    Program p = parse_program("let x = (cons(1)) in [x] := 2; [x]");
    CHECK(erase_annotations(p.main).get() == p.main.get());
}

TEST_CASE("started loops erase back to plain loops") {
    CmdPtr cond = Cmd::expc(Expr::lit(Value::boolean(true)));
    CmdPtr started = Cmd::while_dec_started(3, cond);
    CmdPtr erased = Cmd::while_(cond);
    CHECK(cmd_equal(erase_annotations(started), erased));

    std::vector<AwaitItem> items{{Expr::lit(Value::integer(0)), Expr::lit(Value::integer(1))}};
    CmdPtr body = Cmd::expc(Expr::lit(Value::boolean(true)));
    CmdPtr as = Cmd::await_started(items, Expr::lit(Value::loc(HeapLoc{0})), body);
    CmdPtr expect = Cmd::while_(await_expansion(Expr::lit(Value::loc(HeapLoc{0})), body));
    CHECK(cmd_equal(erase_annotations(as), expect));
}

TEST_CASE("command sizes ignore ghost payloads") {
    Program annotated = parse_program("ghost new_signal 3 as s; ghost set_signal s; tt");
    Program plain = parse_program("tt");
    CHECK(cmd_size(erase_annotations(annotated.main)) == cmd_size(plain.main));
    CHECK(cmd_size(annotated.main) == cmd_size(plain.main));
}

TEST_CASE("loop degrees") {
    CHECK(extract_degree(parse_program("tt").main) == 0);
    CHECK(extract_degree(parse_program("while (true) do skip").main) == 2);
    CHECK(extract_degree(parse_program("while (while (true) do skip; true) do skip").main) == 4);
    CHECK(extract_degree(parse_program("fork (while (true) do skip); tt").main) == 2);
    CHECK(extract_degree(parse_program("let x = (while (true) do skip) in tt").main) == 2);

    CmdPtr cond = Cmd::expc(Expr::lit(Value::boolean(true)));
    CHECK(extract_degree(Cmd::while_dec_started(5, cond)) == 1);
    std::vector<AwaitItem> items;
    CHECK(extract_degree(Cmd::await_started(items, Expr::lit(Value::loc(HeapLoc{0})), cond)) == 1);
}

TEST_CASE("parse errors carry positions") {
    CHECK_THROWS_AS(parse_program("let x = 5"), ParseError);
    CHECK_THROWS_AS(parse_program("if true"), ParseError);
    CHECK_THROWS_AS(parse_program("while (true) do"), ParseError);
    CHECK_THROWS_AS(parse_program(""), ParseError);
    CHECK_THROWS_AS(parse_program("(tt"), ParseError);
    CHECK_THROWS_AS(parse_program("tt tt"), ParseError);

    try {
        parse_program("let x =\n  @");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
        CHECK(e.col >= 1);
    }
}

TEST_CASE("invariant declarations are checked") {
    CHECK_THROWS_AS(parse_program("invariant A = true;\ninvariant A = false;\ntt"), ParseError);
    // Unknown invariant name in a mutex chunk or ghost initialization.
    CHECK_THROWS_AS(parse_program("let m = (new_mutex) in ghost mut_init m at 0 with NOPE; tt"),
                    ParseError);
    CHECK_THROWS_AS(
        parse_program("let m = (new_mutex) in fork (tt) giving { mutex[1/2](m, 0, NOPE) }; tt"),
        ParseError);
}

TEST_CASE("await mutex expressions may not dereference") {
    try {
        parse_program("with [m] await (tt)");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("mutex expression may not dereference") !=
              std::string::npos);
    }
}

TEST_CASE("comments and whitespace are skipped") {
    Program p = parse_program("// header\nlet x = (1) in // bind\n x + 1\n// trailing");
    REQUIRE(p.main->kind == Cmd::Kind::Let);
    CHECK(p.main->binder == "x");
}

TEST_CASE("printer emits debug forms for runtime-only commands") {
    CmdPtr cond = Cmd::expc(Expr::lit(Value::boolean(true)));
    std::string wd = print_cmd(*Cmd::while_dec_started(4, cond));
    CHECK(wd.find("4") != std::string::npos);

    std::vector<AwaitItem> items{{Expr::lit(Value::integer(0)), Expr::lit(Value::integer(1))}};
    CmdPtr as = Cmd::await_started(items, Expr::lit(Value::loc(HeapLoc{2})), cond);
    std::string s = print_cmd(*as);
    CHECK(s.find("sig(0, 1)") != std::string::npos);
}
