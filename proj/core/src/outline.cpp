#include "gsv/outline.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>
#include <utility>

#include "gsv/models.hpp"

namespace gsv {

namespace {

using nlohmann::json;

struct Fail {
    std::string msg;
    std::string at;
};

[[noreturn]] void fail(const std::string& at, const std::string& msg) { throw Fail{msg, at}; }

bool has_wildcard(const AssertionPtr& a) {
    if (!a) return false;
    if (a->a1.wild || a->a2.wild || a->a3.wild || a->held_wild) return true;
    for (const auto& k : a->kids)
        if (has_wildcard(k)) return true;
    return false;
}

const char* kind_name(Cmd::Kind k) {
    switch (k) {
    case Cmd::Kind::Exp: return "exp";
    case Cmd::Kind::Let: return "let";
    case Cmd::Kind::If: return "if";
    case Cmd::Kind::While: return "while";
    case Cmd::Kind::Fork: return "fork";
    case Cmd::Kind::Alloc: return "alloc";
    case Cmd::Kind::Read: return "read";
    case Cmd::Kind::Write: return "write";
    case Cmd::Kind::NewMutex: return "new_mutex";
    case Cmd::Kind::Acquire: return "acquire";
    case Cmd::Kind::Release: return "release";
    case Cmd::Kind::Ghost: return "ghost";
    case Cmd::Kind::WhileDecStarted: return "while_dec_started";
    case Cmd::Kind::AwaitStarted: return "await_started";
    }
    return "?";
}

Expr unit_lit() { return Expr::lit(Value::unit()); }

class Checker {
public:
    explicit Checker(const std::vector<InvariantDecl>& table) : table_(table) {}

    SymState check(const CmdPtr& cmd, const json& node, SymState st, const std::string& res,
                   const std::string& at);

    std::string fresh_var(SymState& st) { return "?" + std::to_string(st.fresh++); }

    void reserve(const std::string& name, const std::string& at) {
        if (name.empty() || name == "_") return;
        if (!used_.insert(name).second)
            fail(at, "binder '" + name + "' is reused; the outline checker needs "
                     "per-path-unique names");
    }

    void seed_used(const StateCase& c) {
        std::vector<std::string> vs;
        for (const Expr& p : c.pures) p.free_vars(vs);
        auto arg = [&](const AArg& a) {
            if (!a.wild) a.e.free_vars(vs);
        };
        for (const AssertionPtr& ch : c.chunks) {
            arg(ch->a1);
            arg(ch->a2);
            arg(ch->a3);
        }
        for (const ObsItem& o : c.obs) {
            o.target.free_vars(vs);
            o.level.free_vars(vs);
        }
        used_.insert(vs.begin(), vs.end());
    }

private:
    AssertionPtr parse_field(const json& node, const char* field, const std::string& at) {
        if (!node.contains(field) || !node[field].is_string())
            fail(at, std::string("missing '") + field + "' annotation");
        try {
            return parse_assertion_text(node[field].get<std::string>(), table_);
        } catch (const ParseError& e) {
            fail(at, std::string("bad '") + field + "' annotation: " + e.what());
        }
    }

    const json& child(const json& node, std::size_t i, const std::string& at) {
        if (!node.contains("children") || !node["children"].is_array() ||
            node["children"].size() <= i)
            fail(at, "outline node needs children[" + std::to_string(i) + "]");
        return node["children"][i];
    }

    static void set_result(SymState& st, const std::string& res, const Expr& e) {
        for (StateCase& c : st.cases) c.defs[res] = e;
    }

    static Expr result_is(const std::string& res, bool b) {
        return Expr::eq(Expr::var(res), Expr::lit(Value::boolean(b)));
    }

    const std::vector<InvariantDecl>& table_;
    std::set<std::string> used_;
};

SymState Checker::check(const CmdPtr& cmd, const json& node, SymState st, const std::string& res,
                        const std::string& at) {
    if (!node.is_object() || !node.contains("rule") || !node["rule"].is_string())
        fail(at, "outline node must be an object with a \"rule\"");
    const std::string rule = node["rule"].get<std::string>();

    // Wrapper rules apply to any command form.
    if (rule == "frame") {
        AssertionPtr f = parse_field(node, "frame", at);
        if (!is_or_free(f)) fail(at, "frame may not contain disjunctions");
        if (has_wildcard(f)) fail(at, "frame may not contain wildcards");
        if (assertion_has_obs(f)) fail(at, "obligations cannot be framed away");
        std::uint64_t dummy = 0;
        std::vector<StateCase> fcases = assertion_cases(f, false, dummy);
        for (StateCase& c : st.cases) {
            std::string w;
            if (case_unsat(c)) continue;
            if (!case_carve(c, fcases[0], &w)) fail(at, "frame is not available (" + w + ")");
        }
        SymState post = check(cmd, child(node, 0, at), std::move(st), res, at + ".c0");
        for (StateCase& c : post.cases) {
            c.pures.insert(c.pures.end(), fcases[0].pures.begin(), fcases[0].pures.end());
            c.chunks.insert(c.chunks.end(), fcases[0].chunks.begin(), fcases[0].chunks.end());
            c.obs.insert(c.obs.end(), fcases[0].obs.begin(), fcases[0].obs.end());
        }
        return post;
    }
    if (rule == "conseq") {
        AssertionPtr to = parse_field(node, "to", at);
        if (auto err = entail(st.cases, to)) fail(at, "conseq does not follow: " + *err);
        SymState next;
        next.fresh = st.fresh;
        next.cases = assertion_cases(to, true, next.fresh);
        return check(cmd, child(node, 0, at), std::move(next), res, at + ".c0");
    }

    auto expect = [&](Cmd::Kind k) {
        if (cmd->kind != k)
            fail(at, "outline rule '" + rule + "' does not match command form '" +
                         kind_name(cmd->kind) + "'");
    };

    if (rule == "exp") {
        expect(Cmd::Kind::Exp);
        set_result(st, res, cmd->e1);
        return st;
    }
    if (rule == "let") {
        expect(Cmd::Kind::Let);
        std::string bound = cmd->binder == "_" ? fresh_var(st) : cmd->binder;
        reserve(cmd->binder, at);
        SymState mid = check(cmd->c1, child(node, 0, at), std::move(st), bound, at + ".c0");
        return check(cmd->c2, child(node, 1, at), std::move(mid), res, at + ".c1");
    }
    if (rule == "if") {
        expect(Cmd::Kind::If);
        std::string rc = fresh_var(st);
        SymState cond = check(cmd->c1, child(node, 0, at), std::move(st), rc, at + ".c0");
        SymState taken = cond;
        for (StateCase& c : taken.cases) c.pures.push_back(result_is(rc, true));
        taken.prune();
        SymState post = check(cmd->c2, child(node, 1, at), std::move(taken), res, at + ".c1");
        for (StateCase c : cond.cases) {
            c.pures.push_back(result_is(rc, false));
            c.defs[res] = unit_lit();
            post.cases.push_back(std::move(c));
        }
        post.prune();
        return post;
    }
    if (rule == "while_dec") {
        expect(Cmd::Kind::While);
        if (cmd->anno.kind != LoopAnno::Kind::Dec)
            fail(at, "while_dec outline on a loop without a bound annotation");
        if (!node.contains("var") || !node["var"].is_string())
            fail(at, "while_dec needs a bound variable name ('var')");
        std::string n = node["var"].get<std::string>();
        reserve(n, at);
        AssertionPtr inv = parse_field(node, "inv", at);
        const Expr& dec = cmd->anno.dec;

        Expr zero = Expr::lit(Value::integer(0));
        AssertionPtr entry = Assertion::star(
            assertion_subst_var(inv, n, dec),
            Assertion::pure_of(Expr::op("<", {zero, dec})));
        if (auto err = entail(st.cases, entry)) fail(at, "loop entry: " + *err);

        SymState body;
        body.fresh = st.fresh;
        body.cases = assertion_cases(inv, true, body.fresh);
        for (StateCase& c : body.cases)
            c.pures.push_back(Expr::op("<", {zero, Expr::var(n)}));
        std::string rc = fresh_var(body);
        SymState cond = check(cmd->c1, child(node, 0, at), std::move(body), rc, at + ".c0");

        Expr next_n = Expr::op("-", {Expr::var(n), Expr::lit(Value::integer(1))});
        AssertionPtr keep = Assertion::star(
            assertion_subst_var(inv, n, next_n),
            Assertion::pure_of(Expr::op("<", {zero, next_n})));
        std::vector<StateCase> cont;
        for (StateCase c : cond.cases) {
            c.pures.push_back(result_is(rc, true));
            cont.push_back(std::move(c));
        }
        if (auto err = entail(cont, keep)) fail(at, "loop preservation: " + *err);

        SymState post;
        post.fresh = cond.fresh;
        for (StateCase c : cond.cases) {
            c.pures.push_back(result_is(rc, false));
            c.defs[res] = unit_lit();
            post.cases.push_back(std::move(c));
        }
        post.prune();
        return post;
    }
    if (rule == "await") {
        expect(Cmd::Kind::While);
        if (cmd->anno.kind != LoopAnno::Kind::Await)
            fail(at, "await outline on a loop without a wait annotation");
        AssertionPtr winv = parse_field(node, "inv", at);
        const Expr& m = cmd->anno.mutex;

        if (auto err = entail(st.cases, winv)) fail(at, "await entry: " + *err);

        SymState iter;
        iter.fresh = st.fresh;
        iter.cases = assertion_cases(winv, true, iter.fresh);
        if (auto err = sym_acquire(iter, m)) fail(at, *err);
        std::string rb = fresh_var(iter);
        SymState body = check(cmd->anno.body, child(node, 0, at), std::move(iter), rb, at + ".c0");

        SymState again;
        again.fresh = body.fresh;
        for (StateCase c : body.cases) {
            c.pures.push_back(result_is(rb, false));
            again.cases.push_back(std::move(c));
        }
        again.prune();
        for (const StateCase& c : again.cases)
            if (auto err = sym_gate_check(c, cmd->anno.signals, m)) fail(at, *err);
        if (auto err = sym_release(again, m)) fail(at, "await repeat: " + *err);
        if (auto err = entail(again.cases, winv)) fail(at, "await preservation: " + *err);

        SymState done;
        done.fresh = again.fresh;
        for (StateCase c : body.cases) {
            c.pures.push_back(result_is(rb, true));
            done.cases.push_back(std::move(c));
        }
        done.prune();
        if (auto err = sym_release(done, m)) fail(at, "await exit: " + *err);
        set_result(done, res, unit_lit());
        return done;
    }
    if (rule == "fork") {
        expect(Cmd::Kind::Fork);
        AssertionPtr give = cmd->give ? cmd->give : Assertion::bool_lit(true);
        if (!is_or_free(give)) fail(at, "fork donation may not contain disjunctions");
        std::uint64_t dummy = 0;
        StateCase target = assertion_cases(give, false, dummy)[0];
        for (StateCase& c : st.cases) {
            if (case_unsat(c)) continue;
            std::string w;
            if (!case_carve(c, target, &w)) fail(at, "fork donation is not available (" + w + ")");
        }
        SymState child_st;
        child_st.fresh = st.fresh;
        child_st.cases = assertion_cases(give, true, child_st.fresh);
        std::string rc = fresh_var(child_st);
        SymState child_post =
            check(cmd->c1, child(node, 0, at), std::move(child_st), rc, at + ".c0");
        child_post.prune();
        for (const StateCase& c : child_post.cases)
            if (!c.obs.empty())
                fail(at, "forked thread retains obligations: " +
                             Assertion::obs_of(c.obs)->str());
        st.fresh = child_post.fresh;
        set_result(st, res, unit_lit());
        return st;
    }
    if (rule == "ghost") {
        expect(Cmd::Kind::Ghost);
        reserve(cmd->ghost.binder, at);
        if (auto err = sym_ghost(st, cmd->ghost)) fail(at, *err);
        return check(cmd->c1, child(node, 0, at), std::move(st), res, at + ".c0");
    }
    if (rule == "alloc") {
        expect(Cmd::Kind::Alloc);
        for (StateCase& c : st.cases)
            c.chunks.push_back(Assertion::points_to(AArg::of(Expr::var(res)), AArg::of(cmd->e1)));
        return st;
    }
    if (rule == "read") {
        expect(Cmd::Kind::Read);
        for (StateCase& c : st.cases) {
            if (case_unsat(c)) continue;
            PureCtx px(c);
            const Assertion* hit = nullptr;
            for (const AssertionPtr& ch : c.chunks) {
                if (ch->kind == Assertion::Kind::PointsTo && !ch->a1.wild && !ch->a2.wild &&
                    exprs_match(px, c, ch->a1.e, cmd->e1)) {
                    hit = ch.get();
                    break;
                }
            }
            if (!hit)
                fail(at, "read of a cell the thread does not own: [" + cmd->e1.str() + "] in " +
                             c.str());
            c.defs[res] = hit->a2.e;
        }
        return st;
    }
    if (rule == "write") {
        expect(Cmd::Kind::Write);
        for (StateCase& c : st.cases) {
            if (case_unsat(c)) continue;
            PureCtx px(c);
            std::vector<std::size_t> idxs;
            Rational have(0);
            for (std::size_t i = 0; i < c.chunks.size(); ++i) {
                const auto& ch = c.chunks[i];
                if (ch->kind == Assertion::Kind::PointsTo && !ch->a1.wild &&
                    exprs_match(px, c, ch->a1.e, cmd->e1)) {
                    idxs.push_back(i);
                    have += ch->frac.value();
                }
            }
            if (!(have == Rational(1)))
                fail(at, "write requires full ownership of the cell: [" + cmd->e1.str() +
                             "] in " + c.str());
            AArg loc = c.chunks[idxs[0]]->a1;
            std::vector<AssertionPtr> next;
            for (std::size_t i = 0; i < c.chunks.size(); ++i)
                if (std::find(idxs.begin(), idxs.end(), i) == idxs.end())
                    next.push_back(c.chunks[i]);
            next.push_back(Assertion::points_to(loc, AArg::of(cmd->e2)));
            c.chunks = std::move(next);
            c.defs[res] = unit_lit();
        }
        return st;
    }
    if (rule == "new_mutex") {
        expect(Cmd::Kind::NewMutex);
        for (StateCase& c : st.cases)
            c.chunks.push_back(Assertion::uninit_cell(AArg::of(Expr::var(res))));
        return st;
    }
    if (rule == "acquire") {
        expect(Cmd::Kind::Acquire);
        if (auto err = sym_acquire(st, cmd->e1)) fail(at, *err);
        set_result(st, res, unit_lit());
        return st;
    }
    if (rule == "release") {
        expect(Cmd::Kind::Release);
        if (auto err = sym_release(st, cmd->e1)) fail(at, *err);
        set_result(st, res, unit_lit());
        return st;
    }
    if (rule == "while" && cmd->kind == Cmd::Kind::While)
        fail(at, "loop without a termination annotation cannot be checked; use "
                 "while_dec or await");
    fail(at, "unknown outline rule '" + rule + "' for command form '" +
                 kind_name(cmd->kind) + "'");
}

OutlineResult run_check(const std::vector<InvariantDecl>& table, const CmdPtr& cmd,
                        const json& node, SymState st, const std::string& post_text,
                        bool require_no_obs) {
    Checker ck(table);
    for (const StateCase& c : st.cases) ck.seed_used(c);
    std::string res = ck.fresh_var(st);
    SymState out;
    try {
        out = ck.check(cmd, node, std::move(st), res, "main");
    } catch (const Fail& f) {
        return {false, f.msg, f.at};
    }
    out.prune();
    if (require_no_obs) {
        for (const StateCase& c : out.cases)
            if (!c.obs.empty())
                return {false,
                        "main thread retains obligations: " + Assertion::obs_of(c.obs)->str(),
                        "post"};
    }
    if (!post_text.empty()) {
        AssertionPtr q;
        try {
            q = parse_assertion_text(post_text, table);
        } catch (const ParseError& e) {
            return {false, std::string("bad postcondition: ") + e.what(), "post"};
        }
        if (auto err = entail(out.cases, q)) return {false, *err, "post"};
    }
    return {};
}

} // namespace

OutlineResult check_outline(const Program& prog, const std::string& outline_json) {
    json doc = json::parse(outline_json, nullptr, false);
    if (doc.is_discarded()) return {false, "outline is not valid JSON", ""};
    if (!doc.is_object() || !doc.contains("main"))
        return {false, "outline needs a \"main\" node", ""};
    std::string post;
    if (doc.contains("post")) {
        if (!doc["post"].is_string()) return {false, "\"post\" must be an assertion string", ""};
        post = doc["post"].get<std::string>();
    }
    SymState st;
    st.cases.push_back(StateCase{});
    return run_check(prog.invariants, prog.main, doc["main"], std::move(st), post, true);
}

namespace {

json skeleton_node(const CmdPtr& cmd) {
    json n;
    switch (cmd->kind) {
    case Cmd::Kind::Let:
        n["rule"] = "let";
        n["children"] = json::array({skeleton_node(cmd->c1), skeleton_node(cmd->c2)});
        return n;
    case Cmd::Kind::If:
        n["rule"] = "if";
        n["children"] = json::array({skeleton_node(cmd->c1), skeleton_node(cmd->c2)});
        return n;
    case Cmd::Kind::While:
        if (cmd->anno.kind == LoopAnno::Kind::Dec) {
            n["rule"] = "while_dec";
            n["var"] = "";
            n["inv"] = "";
            n["children"] = json::array({skeleton_node(cmd->c1)});
        } else if (cmd->anno.kind == LoopAnno::Kind::Await) {
            n["rule"] = "await";
            n["inv"] = "";
            n["children"] = json::array({skeleton_node(cmd->anno.body)});
        } else {
            n["rule"] = "while";
            n["children"] = json::array({skeleton_node(cmd->c1)});
        }
        return n;
    case Cmd::Kind::Fork:
    case Cmd::Kind::Ghost:
        n["rule"] = kind_name(cmd->kind);
        n["children"] = json::array({skeleton_node(cmd->c1)});
        return n;
    default:
        n["rule"] = kind_name(cmd->kind);
        return n;
    }
}

} // namespace

std::string outline_skeleton(const CmdPtr& cmd) { return skeleton_node(cmd).dump(); }

OutlineResult check_triple(const std::vector<InvariantDecl>& table, const CmdPtr& cmd,
                           const std::string& node_json, const std::string& pre,
                           const std::string& post) {
    json node = json::parse(node_json, nullptr, false);
    if (node.is_discarded()) return {false, "outline node is not valid JSON", ""};
    AssertionPtr p;
    try {
        p = parse_assertion_text(pre, table);
    } catch (const ParseError& e) {
        return {false, std::string("bad precondition: ") + e.what(), "pre"};
    }
    SymState st;
    st.cases = assertion_cases(p, true, st.fresh);
    return run_check(table, cmd, node, std::move(st), post, false);
}

} // namespace gsv
