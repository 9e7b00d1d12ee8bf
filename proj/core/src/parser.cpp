#include "gsv/parser.hpp"

#include <cctype>
#include <unordered_set>
#include <utility>
#include <vector>

namespace gsv {

namespace {

enum class Tok { Ident, Kw, Int, Punct, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::int64_t ival = 0;
    int line = 1;
    int col = 1;
};

const std::unordered_set<std::string>& keywords() {
    static const std::unordered_set<std::string> kws = {
        "let",       "in",        "if",         "then",          "while",
        "do",        "skip",      "dec",        "with",          "await",
        "awaiting",  "fork",      "giving",     "ghost",         "new_signal",
        "set_signal", "mut_init", "alloc_signal_id", "init_signal", "as",
        "at",        "sig",       "mut",        "obs",           "true",
        "false",     "tt",        "nil",        "cons",          "new_mutex",
        "acquire",   "release",   "append",     "tail",          "size",
        "ite",       "invariant", "pure",       "uninit",        "mutex",
        "locked",    "signal",    "sig_uninit",
    };
    return kws;
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }

std::vector<Token> lex(const std::string& text) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) {
            if (text[i + k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        i += n;
    };
    while (i < text.size()) {
        char c = text[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance(1);
            continue;
        }
        if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
            while (i < text.size() && text[i] != '\n') advance(1);
            continue;
        }
        Token t;
        t.line = line;
        t.col = col;
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            t.kind = Tok::Int;
            t.text = text.substr(i, j - i);
            try {
                t.ival = std::stoll(t.text);
            } catch (const std::exception&) {
                throw ParseError(line, col, "integer literal out of range");
            }
            advance(j - i);
            out.push_back(std::move(t));
            continue;
        }
        if (ident_start(c)) {
            std::size_t j = i;
            while (j < text.size() && ident_char(text[j])) ++j;
            t.text = text.substr(i, j - i);
            if (t.text == "_") {
                t.kind = Tok::Punct;
            } else {
                t.kind = keywords().count(t.text) ? Tok::Kw : Tok::Ident;
            }
            advance(j - i);
            out.push_back(std::move(t));
            continue;
        }
        auto two = i + 1 < text.size() ? text.substr(i, 2) : std::string();
        if (two == ":=" || two == "!=" || two == "|-" || two == "->" || two == "**" ||
            two == "\\/") {
            t.kind = Tok::Punct;
            t.text = two;
            advance(2);
            out.push_back(std::move(t));
            continue;
        }
        static const std::string singles = "()[]{},;=<+-!/";
        if (singles.find(c) != std::string::npos) {
            t.kind = Tok::Punct;
            t.text = std::string(1, c);
            advance(1);
            out.push_back(std::move(t));
            continue;
        }
        throw ParseError(line, col, std::string("unexpected character '") + c + "'");
    }
    Token end;
    end.kind = Tok::End;
    end.line = line;
    end.col = col;
    out.push_back(std::move(end));
    return out;
}

bool has_deref(const Expr& e) {
    if (e.kind() == Expr::Kind::Op && e.op_name() == "deref") return true;
    for (const auto& a : e.args()) {
        if (has_deref(a)) return true;
    }
    return false;
}

class Parser {
public:
    Parser(std::vector<Token> toks, std::vector<InvariantDecl> table)
        : toks_(std::move(toks)), decls_(std::move(table)) {}

    Program program() {
        while (at_kw("invariant")) {
            next();
            std::string name = expect_ident("invariant name");
            expect_punct("=");
            AssertionPtr body = assertion();
            expect_punct(";");
            for (const auto& d : decls_) {
                if (d.name == name) fail("duplicate invariant '" + name + "'");
            }
            decls_.push_back({name, body});
        }
        CmdPtr main = cmd();
        expect_end();
        Program p;
        p.invariants = decls_;
        p.main = main;
        return p;
    }

    AssertionPtr assertion_only() {
        AssertionPtr a = assertion();
        expect_end();
        return a;
    }

    Expr expr_only() {
        Expr e = expr();
        expect_end();
        return e;
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::vector<InvariantDecl> decls_;
    int hoist_ctr_ = 0;

    const Token& peek(std::size_t k = 0) const {
        std::size_t i = pos_ + k;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    const Token& next() {
        const Token& t = peek();
        if (t.kind != Tok::End) ++pos_;
        return t;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        const Token& t = peek();
        throw ParseError(t.line, t.col, msg);
    }
    bool at_punct(const std::string& s) const {
        return peek().kind == Tok::Punct && peek().text == s;
    }
    bool at_kw(const std::string& s) const { return peek().kind == Tok::Kw && peek().text == s; }
    void expect_punct(const std::string& s) {
        if (!at_punct(s)) fail("expected '" + s + "'");
        next();
    }
    void expect_kw(const std::string& s) {
        if (!at_kw(s)) fail("expected '" + s + "'");
        next();
    }
    void expect_end() {
        if (peek().kind != Tok::End) fail("unexpected trailing input");
    }
    std::string expect_ident(const std::string& what) {
        if (peek().kind != Tok::Ident) fail("expected " + what);
        return next().text;
    }
    std::string binder_name() {
        if (at_punct("_")) {
            next();
            return "_";
        }
        return expect_ident("binder");
    }

    AssertionPtr lookup_invariant(const std::string& name) {
        for (const auto& d : decls_) {
            if (d.name == name) return d.body;
        }
        fail("unknown invariant '" + name + "'");
    }

    // ---- expressions ----

    Expr expr() { return cmp_from(add()); }

    Expr cmp_from(Expr a) {
        if (at_punct("=")) {
            next();
            return Expr::eq(std::move(a), add());
        }
        if (at_punct("!=")) {
            next();
            return Expr::negate(Expr::eq(std::move(a), add()));
        }
        if (at_punct("<")) {
            next();
            return Expr::op("<", {std::move(a), add()});
        }
        return a;
    }

    Expr add() { return add_from(unary()); }

    Expr add_from(Expr a) {
        while (at_punct("+") || at_punct("-")) {
            std::string op = next().text;
            a = Expr::op(op, {std::move(a), unary()});
        }
        return a;
    }

    Expr unary() {
        if (at_punct("!")) {
            next();
            return Expr::negate(unary());
        }
        return expr_atom();
    }

    Expr call_args(const std::string& name, std::size_t n) {
        expect_punct("(");
        std::vector<Expr> args;
        for (std::size_t k = 0; k < n; ++k) {
            if (k > 0) expect_punct(",");
            args.push_back(expr());
        }
        expect_punct(")");
        return Expr::op(name, std::move(args));
    }

    Expr expr_atom() {
        const Token& t = peek();
        switch (t.kind) {
        case Tok::Int: {
            next();
            return Expr::lit(Value::integer(t.ival));
        }
        case Tok::Ident: {
            next();
            return Expr::var(t.text);
        }
        case Tok::Kw: {
            if (t.text == "true" || t.text == "false") {
                next();
                return Expr::lit(Value::boolean(t.text == "true"));
            }
            if (t.text == "tt") {
                next();
                return Expr::lit(Value::unit());
            }
            if (t.text == "nil") {
                next();
                return Expr::lit(Value::nil());
            }
            if (t.text == "append") {
                next();
                return call_args("append", 2);
            }
            if (t.text == "tail") {
                next();
                return call_args("tail", 1);
            }
            if (t.text == "size") {
                next();
                return call_args("size", 1);
            }
            if (t.text == "ite") {
                next();
                return call_args("ite", 3);
            }
            fail("unexpected keyword '" + t.text + "' in expression");
        }
        case Tok::Punct: {
            if (t.text == "(") {
                next();
                Expr e = expr();
                expect_punct(")");
                return e;
            }
            if (t.text == "[") {
                next();
                Expr e = expr();
                expect_punct("]");
                return Expr::op("deref", {std::move(e)});
            }
            fail("unexpected '" + t.text + "' in expression");
        }
        case Tok::End: fail("unexpected end of input in expression");
        }
        fail("unexpected token");
    }

    // ---- deref hoisting ----

    Expr strip_derefs(const Expr& e, std::vector<std::pair<std::string, Expr>>& lets) {
        if (e.kind() == Expr::Kind::Op && e.op_name() == "deref") {
            Expr arg = strip_derefs(e.args()[0], lets);
            std::string name = "$d" + std::to_string(hoist_ctr_++);
            lets.emplace_back(name, std::move(arg));
            return Expr::var(name);
        }
        if (e.args().empty()) return e;
        std::vector<Expr> args;
        args.reserve(e.args().size());
        bool changed = false;
        for (const auto& a : e.args()) {
            Expr a2 = strip_derefs(a, lets);
            changed = changed || !(a2 == a);
            args.push_back(std::move(a2));
        }
        if (!changed) return e;
        switch (e.kind()) {
        case Expr::Kind::Eq: return Expr::eq(std::move(args[0]), std::move(args[1]));
        case Expr::Kind::Not: return Expr::negate(std::move(args[0]));
        case Expr::Kind::Op: return Expr::op(e.op_name(), std::move(args));
        default: return e;
        }
    }

    CmdPtr wrap_lets(std::vector<std::pair<std::string, Expr>> lets, CmdPtr core) {
        for (auto it = lets.rbegin(); it != lets.rend(); ++it) {
            core = Cmd::let_(it->first, Cmd::read(it->second), std::move(core));
        }
        return core;
    }

    CmdPtr cmd_of_expr(const Expr& e) {
        std::vector<std::pair<std::string, Expr>> lets;
        Expr body = strip_derefs(e, lets);
        return wrap_lets(std::move(lets), Cmd::expc(std::move(body)));
    }

    // ---- commands ----

    CmdPtr cmd() {
        CmdPtr c = cmd_one();
        if (at_punct(";")) {
            next();
            return Cmd::seq(std::move(c), cmd());
        }
        return c;
    }

    CmdPtr cmd_one() {
        if (at_kw("let")) {
            next();
            std::string binder = binder_name();
            expect_punct("=");
            CmdPtr c1 = cmd();
            expect_kw("in");
            CmdPtr c2 = cmd();
            return Cmd::let_(std::move(binder), std::move(c1), std::move(c2));
        }
        if (at_kw("if")) {
            next();
            CmdPtr c1 = cmd();
            expect_kw("then");
            CmdPtr c2 = cmd_one();
            return Cmd::if_(std::move(c1), std::move(c2));
        }
        if (at_kw("while")) {
            next();
            CmdPtr cond = cmd();
            expect_kw("do");
            expect_kw("skip");
            LoopAnno anno;
            if (at_kw("dec")) {
                next();
                anno.kind = LoopAnno::Kind::Dec;
                anno.dec = expr();
            }
            return Cmd::while_(std::move(cond), std::move(anno));
        }
        if (at_kw("with")) {
            next();
            Expr m = expr();
            if (has_deref(m)) fail("mutex expression may not dereference the heap");
            expect_kw("await");
            expect_punct("(");
            CmdPtr body = cmd();
            expect_punct(")");
            LoopAnno anno;
            anno.kind = LoopAnno::Kind::Await;
            anno.mutex = m;
            anno.body = body;
            if (at_kw("awaiting")) {
                next();
                expect_punct("{");
                while (!at_punct("}")) {
                    expect_kw("sig");
                    expect_punct("(");
                    AwaitItem item;
                    item.id = expr();
                    expect_punct(",");
                    item.level = expr();
                    expect_punct(")");
                    anno.signals.push_back(std::move(item));
                    if (!at_punct("}")) expect_punct(",");
                }
                next();
            }
            return Cmd::while_(await_expansion(m, body), std::move(anno));
        }
        if (at_kw("fork")) {
            next();
            expect_punct("(");
            CmdPtr child = cmd();
            expect_punct(")");
            AssertionPtr give;
            if (at_kw("giving")) {
                next();
                expect_punct("{");
                std::vector<AssertionPtr> items;
                while (!at_punct("}")) {
                    items.push_back(assertion_atom());
                    if (!at_punct("}")) expect_punct(",");
                }
                next();
                give = Assertion::star_all(std::move(items));
            }
            return Cmd::fork(std::move(child), std::move(give));
        }
        if (at_kw("ghost")) {
            next();
            GhostCmd g = ghost();
            expect_punct(";");
            CmdPtr cont = cmd();
            return Cmd::ghost_cmd(std::move(g), std::move(cont));
        }
        return cmd_atom();
    }

    CmdPtr cmd_atom() {
        if (at_punct("(")) {
            next();
            CmdPtr c = cmd();
            expect_punct(")");
            return c;
        }
        if (at_punct("[")) {
            next();
            Expr loc = expr();
            expect_punct("]");
            if (at_punct(":=")) {
                next();
                Expr rhs = expr();
                std::vector<std::pair<std::string, Expr>> lets;
                Expr loc2 = strip_derefs(loc, lets);
                Expr rhs2 = strip_derefs(rhs, lets);
                return wrap_lets(std::move(lets),
                                 Cmd::write(std::move(loc2), std::move(rhs2)));
            }
            if (at_punct("=") || at_punct("!=") || at_punct("<") || at_punct("+") ||
                at_punct("-")) {
                Expr full = cmp_from(add_from(Expr::op("deref", {std::move(loc)})));
                return cmd_of_expr(full);
            }
            std::vector<std::pair<std::string, Expr>> lets;
            Expr loc2 = strip_derefs(loc, lets);
            return wrap_lets(std::move(lets), Cmd::read(std::move(loc2)));
        }
        if (at_kw("cons")) {
            next();
            expect_punct("(");
            Expr e = expr();
            expect_punct(")");
            std::vector<std::pair<std::string, Expr>> lets;
            Expr e2 = strip_derefs(e, lets);
            return wrap_lets(std::move(lets), Cmd::alloc(std::move(e2)));
        }
        if (at_kw("new_mutex")) {
            next();
            return Cmd::new_mutex();
        }
        if (at_kw("acquire") || at_kw("release")) {
            bool acq = peek().text == "acquire";
            next();
            Expr e = expr();
            std::vector<std::pair<std::string, Expr>> lets;
            Expr e2 = strip_derefs(e, lets);
            return wrap_lets(std::move(lets),
                             acq ? Cmd::acquire(std::move(e2)) : Cmd::release(std::move(e2)));
        }
        // Expression command.
        Expr e = expr();
        return cmd_of_expr(e);
    }

    GhostCmd ghost() {
        GhostCmd g;
        if (at_kw("new_signal")) {
            next();
            g.kind = GhostCmd::Kind::NewSignal;
            g.a = expr();
            expect_kw("as");
            g.binder = binder_name();
            return g;
        }
        if (at_kw("set_signal")) {
            next();
            g.kind = GhostCmd::Kind::SetSignal;
            g.a = expr();
            return g;
        }
        if (at_kw("mut_init")) {
            next();
            g.kind = GhostCmd::Kind::MutInit;
            g.a = expr();
            expect_kw("at");
            g.b = expr();
            expect_kw("with");
            g.inv_name = expect_ident("invariant name");
            g.inv = lookup_invariant(g.inv_name);
            return g;
        }
        if (at_kw("alloc_signal_id")) {
            next();
            g.kind = GhostCmd::Kind::AllocSignalId;
            expect_kw("as");
            g.binder = binder_name();
            return g;
        }
        if (at_kw("init_signal")) {
            next();
            g.kind = GhostCmd::Kind::InitSignal;
            g.a = expr();
            expect_kw("at");
            g.b = expr();
            expect_kw("as");
            g.binder = binder_name();
            return g;
        }
        fail("expected a ghost command");
    }

    // ---- assertions ----

    Fraction fraction() {
        if (peek().kind != Tok::Int) fail("expected a fraction");
        std::int64_t num = next().ival;
        std::int64_t den = 1;
        if (at_punct("/")) {
            next();
            if (peek().kind != Tok::Int) fail("expected a fraction denominator");
            den = next().ival;
        }
        try {
            return Fraction(num, den);
        } catch (const std::exception& ex) {
            fail(ex.what());
        }
    }

    Fraction opt_frac_tag() {
        if (!at_punct("[")) return Fraction();
        next();
        Fraction f = fraction();
        expect_punct("]");
        return f;
    }

    AArg aarg() {
        if (at_punct("_")) {
            next();
            return AArg::wildcard();
        }
        return AArg::of(expr());
    }

    AssertionPtr assertion() {
        std::vector<AssertionPtr> parts{assertion_star()};
        while (at_punct("\\/")) {
            next();
            parts.push_back(assertion_star());
        }
        return Assertion::or_of(std::move(parts));
    }

    AssertionPtr assertion_star() {
        AssertionPtr a = assertion_atom();
        while (at_punct("**")) {
            next();
            a = Assertion::star(std::move(a), assertion_atom());
        }
        return a;
    }

    AssertionPtr assertion_atom() {
        if (at_kw("true") || at_kw("false")) {
            bool b = next().text == "true";
            return Assertion::bool_lit(b);
        }
        if (at_kw("pure")) {
            next();
            expect_punct("(");
            Expr e = expr();
            expect_punct(")");
            return Assertion::pure_of(std::move(e));
        }
        if (at_kw("obs")) {
            next();
            expect_punct("{");
            std::vector<ObsItem> items;
            while (!at_punct("}")) {
                ObsItem it;
                if (at_kw("sig")) {
                    next();
                } else if (at_kw("mut")) {
                    next();
                    it.is_mutex = true;
                } else {
                    fail("expected sig(..) or mut(..) in obs");
                }
                expect_punct("(");
                it.target = expr();
                expect_punct(",");
                it.level = expr();
                expect_punct(")");
                items.push_back(std::move(it));
                if (!at_punct("}")) expect_punct(",");
            }
            next();
            return Assertion::obs_of(std::move(items));
        }
        if (at_kw("uninit")) {
            next();
            Fraction q = opt_frac_tag();
            expect_punct("(");
            AArg loc = aarg();
            expect_punct(")");
            return Assertion::uninit_cell(std::move(loc), q);
        }
        if (at_kw("mutex")) {
            next();
            Fraction q = opt_frac_tag();
            expect_punct("(");
            AArg loc = aarg();
            expect_punct(",");
            AArg lev = aarg();
            expect_punct(",");
            std::string name = expect_ident("invariant name");
            expect_punct(")");
            return Assertion::mutex_part(std::move(loc), std::move(lev), name,
                                         lookup_invariant(name), q);
        }
        if (at_kw("locked")) {
            next();
            Fraction q = opt_frac_tag();
            expect_punct("(");
            AArg loc = aarg();
            expect_punct(",");
            AArg lev = aarg();
            expect_punct(",");
            std::string name = expect_ident("invariant name");
            expect_punct(",");
            bool held_wild = false;
            Fraction held;
            if (at_punct("_")) {
                next();
                held_wild = true;
            } else {
                held = fraction();
            }
            expect_punct(")");
            return Assertion::locked_part(std::move(loc), std::move(lev), name,
                                          lookup_invariant(name), held_wild, held, q);
        }
        if (at_kw("signal")) {
            next();
            Fraction q = opt_frac_tag();
            expect_punct("(");
            AArg id = aarg();
            expect_punct(",");
            AArg lev = aarg();
            expect_punct(",");
            AArg state = aarg();
            expect_punct(")");
            return Assertion::signal_part(std::move(id), std::move(lev), std::move(state), q);
        }
        if (at_kw("sig_uninit")) {
            next();
            Fraction q = opt_frac_tag();
            expect_punct("(");
            AArg id = aarg();
            expect_punct(")");
            return Assertion::uninit_sig(std::move(id), q);
        }
        if (at_punct("(")) {
            next();
            AssertionPtr a = assertion();
            expect_punct(")");
            return a;
        }
        // Points-to: expr |-(q)-> arg
        Expr loc = expr();
        expect_punct("|-");
        expect_punct("(");
        Fraction q = fraction();
        expect_punct(")");
        expect_punct("->");
        AArg val = aarg();
        return Assertion::points_to(AArg::of(std::move(loc)), std::move(val), q);
    }
};

} // namespace

Program parse_program(const std::string& text) {
    Parser p(lex(text), {});
    return p.program();
}

AssertionPtr parse_assertion_text(const std::string& text,
                                  const std::vector<InvariantDecl>& table) {
    Parser p(lex(text), table);
    return p.assertion_only();
}

Expr parse_expr_text(const std::string& text) {
    Parser p(lex(text), {});
    return p.expr_only();
}

} // namespace gsv
