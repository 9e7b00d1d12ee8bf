#include "gsv/cmd.hpp"

#include "gsv/printer.hpp"

namespace gsv {

bool GhostCmd::operator==(const GhostCmd& o) const {
    return kind == o.kind && binder == o.binder && a == o.a && b == o.b &&
           inv_name == o.inv_name && assertion_equal(inv, o.inv) && gate_items == o.gate_items &&
           gate_mutex == o.gate_mutex;
}

bool GhostCmd::mentions(const std::string& var) const {
    if (a.mentions(var) || b.mentions(var) || gate_mutex.mentions(var) ||
        assertion_mentions(inv, var)) {
        return true;
    }
    for (const auto& it : gate_items) {
        if (it.id.mentions(var) || it.level.mentions(var)) return true;
    }
    return false;
}

GhostCmd GhostCmd::substitute(const std::string& var, const Value& v) const {
    if (!mentions(var)) return *this;
    GhostCmd out = *this;
    out.a = a.substitute(var, v);
    out.b = b.substitute(var, v);
    out.gate_mutex = gate_mutex.substitute(var, v);
    out.inv = assertion_substitute(inv, var, v);
    for (auto& it : out.gate_items) {
        it.id = it.id.substitute(var, v);
        it.level = it.level.substitute(var, v);
    }
    return out;
}

bool LoopAnno::operator==(const LoopAnno& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
    case Kind::None: return true;
    case Kind::Dec: return dec == o.dec;
    case Kind::Await: return mutex == o.mutex && signals == o.signals && cmd_equal(body, o.body);
    }
    return false;
}

namespace {

CmdPtr make(Cmd c) { return std::make_shared<const Cmd>(std::move(c)); }

} // namespace

CmdPtr Cmd::expc(Expr e) {
    Cmd c;
    c.kind = Kind::Exp;
    c.e1 = std::move(e);
    return make(std::move(c));
}

CmdPtr Cmd::value(Value v) { return expc(Expr::lit(std::move(v))); }

CmdPtr Cmd::let_(std::string binder, CmdPtr c1, CmdPtr c2) {
    Cmd c;
    c.kind = Kind::Let;
    c.binder = std::move(binder);
    c.c1 = std::move(c1);
    c.c2 = std::move(c2);
    return make(std::move(c));
}

CmdPtr Cmd::seq(CmdPtr c1, CmdPtr c2) { return let_("_", std::move(c1), std::move(c2)); }

CmdPtr Cmd::if_(CmdPtr cond, CmdPtr then_branch) {
    Cmd c;
    c.kind = Kind::If;
    c.c1 = std::move(cond);
    c.c2 = std::move(then_branch);
    return make(std::move(c));
}

CmdPtr Cmd::while_(CmdPtr cond, LoopAnno anno) {
    Cmd c;
    c.kind = Kind::While;
    c.c1 = std::move(cond);
    c.anno = std::move(anno);
    return make(std::move(c));
}

CmdPtr Cmd::fork(CmdPtr child, AssertionPtr give) {
    Cmd c;
    c.kind = Kind::Fork;
    c.c1 = std::move(child);
    c.give = std::move(give);
    return make(std::move(c));
}

CmdPtr Cmd::alloc(Expr e) {
    Cmd c;
    c.kind = Kind::Alloc;
    c.e1 = std::move(e);
    return make(std::move(c));
}

CmdPtr Cmd::read(Expr e) {
    Cmd c;
    c.kind = Kind::Read;
    c.e1 = std::move(e);
    return make(std::move(c));
}

CmdPtr Cmd::write(Expr e1, Expr e2) {
    Cmd c;
    c.kind = Kind::Write;
    c.e1 = std::move(e1);
    c.e2 = std::move(e2);
    return make(std::move(c));
}

CmdPtr Cmd::new_mutex() {
    Cmd c;
    c.kind = Kind::NewMutex;
    return make(std::move(c));
}

CmdPtr Cmd::acquire(Expr e) {
    Cmd c;
    c.kind = Kind::Acquire;
    c.e1 = std::move(e);
    return make(std::move(c));
}

CmdPtr Cmd::release(Expr e) {
    Cmd c;
    c.kind = Kind::Release;
    c.e1 = std::move(e);
    return make(std::move(c));
}

CmdPtr Cmd::ghost_cmd(GhostCmd g, CmdPtr cont) {
    Cmd c;
    c.kind = Kind::Ghost;
    c.ghost = std::move(g);
    c.c1 = std::move(cont);
    return make(std::move(c));
}

CmdPtr Cmd::while_dec_started(std::uint64_t bound, CmdPtr cond) {
    Cmd c;
    c.kind = Kind::WhileDecStarted;
    c.bound = bound;
    c.c1 = std::move(cond);
    return make(std::move(c));
}

CmdPtr Cmd::await_started(std::vector<AwaitItem> items, Expr mutex, CmdPtr body) {
    Cmd c;
    c.kind = Kind::AwaitStarted;
    c.await_items = std::move(items);
    c.e1 = std::move(mutex);
    c.c1 = std::move(body);
    return make(std::move(c));
}

bool Cmd::operator==(const Cmd& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
    case Kind::Exp: return e1 == o.e1;
    case Kind::Let:
        return binder == o.binder && cmd_equal(c1, o.c1) && cmd_equal(c2, o.c2);
    case Kind::If: return cmd_equal(c1, o.c1) && cmd_equal(c2, o.c2);
    case Kind::While: return cmd_equal(c1, o.c1) && anno == o.anno;
    case Kind::Fork: return cmd_equal(c1, o.c1) && assertion_equal(give, o.give);
    case Kind::Alloc:
    case Kind::Read:
    case Kind::Acquire:
    case Kind::Release: return e1 == o.e1;
    case Kind::Write: return e1 == o.e1 && e2 == o.e2;
    case Kind::NewMutex: return true;
    case Kind::Ghost: return ghost == o.ghost && cmd_equal(c1, o.c1);
    case Kind::WhileDecStarted: return bound == o.bound && cmd_equal(c1, o.c1);
    case Kind::AwaitStarted:
        return await_items == o.await_items && e1 == o.e1 && cmd_equal(c1, o.c1);
    }
    return false;
}

bool Cmd::mentions(const std::string& var) const {
    switch (kind) {
    case Kind::Exp:
    case Kind::Alloc:
    case Kind::Read:
    case Kind::Acquire:
    case Kind::Release: return e1.mentions(var);
    case Kind::Write: return e1.mentions(var) || e2.mentions(var);
    case Kind::NewMutex: return false;
    case Kind::Let:
        if (c1->mentions(var)) return true;
        return binder != var && c2->mentions(var);
    case Kind::If: return c1->mentions(var) || c2->mentions(var);
    case Kind::While:
        if (c1->mentions(var)) return true;
        switch (anno.kind) {
        case LoopAnno::Kind::None: return false;
        case LoopAnno::Kind::Dec: return anno.dec.mentions(var);
        case LoopAnno::Kind::Await:
            if (anno.mutex.mentions(var) || anno.body->mentions(var)) return true;
            for (const auto& s : anno.signals) {
                if (s.id.mentions(var) || s.level.mentions(var)) return true;
            }
            return false;
        }
        return false;
    case Kind::Fork: return c1->mentions(var) || assertion_mentions(give, var);
    case Kind::Ghost:
        if (ghost.mentions(var)) return true;
        return ghost.binder != var && c1->mentions(var);
    case Kind::WhileDecStarted: return c1->mentions(var);
    case Kind::AwaitStarted:
        if (e1.mentions(var) || c1->mentions(var)) return true;
        for (const auto& s : await_items) {
            if (s.id.mentions(var) || s.level.mentions(var)) return true;
        }
        return false;
    }
    return false;
}

std::uint64_t Cmd::size() const {
    switch (kind) {
    case Kind::Exp: return 1 + e1.size();
    case Kind::Let:
    case Kind::If: return 1 + c1->size() + c2->size();
    case Kind::While:
    case Kind::WhileDecStarted: return 1 + c1->size();
    case Kind::Fork: return 1 + c1->size();
    case Kind::Alloc:
    case Kind::Read:
    case Kind::Acquire:
    case Kind::Release: return 1 + e1.size();
    case Kind::Write: return 1 + e1.size() + e2.size();
    case Kind::NewMutex: return 1;
    case Kind::Ghost: return c1->size();
    case Kind::AwaitStarted: return 1 + await_expansion(e1, c1)->size();
    }
    return 1;
}

std::string Cmd::str() const { return print_cmd(*this); }

bool cmd_equal(const CmdPtr& a, const CmdPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return *a == *b;
}

CmdPtr substitute(const CmdPtr& c, const std::string& var, const Value& v) {
    if (!c || !c->mentions(var)) return c;
    Cmd out = *c;
    switch (c->kind) {
    case Cmd::Kind::Exp:
    case Cmd::Kind::Alloc:
    case Cmd::Kind::Read:
    case Cmd::Kind::Acquire:
    case Cmd::Kind::Release:
        out.e1 = c->e1.substitute(var, v);
        break;
    case Cmd::Kind::Write:
        out.e1 = c->e1.substitute(var, v);
        out.e2 = c->e2.substitute(var, v);
        break;
    case Cmd::Kind::NewMutex: break;
    case Cmd::Kind::Let:
        out.c1 = substitute(c->c1, var, v);
        if (c->binder != var) out.c2 = substitute(c->c2, var, v);
        break;
    case Cmd::Kind::If:
        out.c1 = substitute(c->c1, var, v);
        out.c2 = substitute(c->c2, var, v);
        break;
    case Cmd::Kind::While:
        out.c1 = substitute(c->c1, var, v);
        switch (c->anno.kind) {
        case LoopAnno::Kind::None: break;
        case LoopAnno::Kind::Dec:
            out.anno.dec = c->anno.dec.substitute(var, v);
            break;
        case LoopAnno::Kind::Await:
            out.anno.mutex = c->anno.mutex.substitute(var, v);
            out.anno.body = substitute(c->anno.body, var, v);
            for (auto& s : out.anno.signals) {
                s.id = s.id.substitute(var, v);
                s.level = s.level.substitute(var, v);
            }
            break;
        }
        break;
    case Cmd::Kind::Fork:
        out.c1 = substitute(c->c1, var, v);
        out.give = assertion_substitute(c->give, var, v);
        break;
    case Cmd::Kind::Ghost:
        out.ghost = c->ghost.substitute(var, v);
        if (c->ghost.binder != var) out.c1 = substitute(c->c1, var, v);
        break;
    case Cmd::Kind::WhileDecStarted:
        out.c1 = substitute(c->c1, var, v);
        break;
    case Cmd::Kind::AwaitStarted:
        out.e1 = c->e1.substitute(var, v);
        out.c1 = substitute(c->c1, var, v);
        for (auto& s : out.await_items) {
            s.id = s.id.substitute(var, v);
            s.level = s.level.substitute(var, v);
        }
        break;
    }
    return std::make_shared<const Cmd>(std::move(out));
}

std::optional<Value> as_value(const CmdPtr& c) {
    if (!c || c->kind != Cmd::Kind::Exp) return std::nullopt;
    if (!c->e1.is_closed()) return std::nullopt;
    return eval_expr(c->e1);
}

CmdPtr await_expansion(const Expr& mutex, const CmdPtr& body) {
    CmdPtr tail = Cmd::seq(Cmd::release(mutex), Cmd::expc(Expr::negate(Expr::var("$r"))));
    return Cmd::seq(Cmd::acquire(mutex), Cmd::let_("$r", body, std::move(tail)));
}

CmdPtr await_expansion_gated(const std::vector<AwaitItem>& items, const Expr& mutex,
                             const CmdPtr& body) {
    GhostCmd gate;
    gate.kind = GhostCmd::Kind::AwaitGate;
    gate.a = Expr::var("$r");
    gate.gate_items = items;
    gate.gate_mutex = mutex;
    CmdPtr tail = Cmd::seq(Cmd::release(mutex), Cmd::expc(Expr::negate(Expr::var("$r"))));
    CmdPtr gated = Cmd::ghost_cmd(std::move(gate), std::move(tail));
    return Cmd::seq(Cmd::acquire(mutex), Cmd::let_("$r", body, std::move(gated)));
}

} // namespace gsv
