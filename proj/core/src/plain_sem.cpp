#include "gsv/plain_sem.hpp"

#include <sstream>

namespace gsv {

PlainMachine PlainMachine::boot(CmdPtr main) {
    PlainMachine m;
    m.threads.emplace(0, std::move(main));
    return m;
}

ThreadId PlainMachine::fresh_tid() const {
    ThreadId id = 0;
    for (const auto& [tid, _] : threads) {
        if (tid != id) break;
        ++id;
    }
    return id;
}

namespace {

struct Ctx {
    PlainMachine& m;
    PlainStep& out;

    CmdPtr stuck(const std::string& reason) {
        out.status = PlainStep::Status::Stuck;
        out.reason = reason;
        return nullptr;
    }

    CmdPtr blocked() {
        out.status = PlainStep::Status::Blocked;
        return nullptr;
    }

    std::optional<HeapLoc> eval_loc(const Expr& e) {
        auto v = eval_expr(e);
        if (!v || !v->is_loc()) return std::nullopt;
        return v->as_loc();
    }

    CmdPtr step(const CmdPtr& c) {
        switch (c->kind) {
        case Cmd::Kind::Exp:
            return stuck("expression does not evaluate: " + c->e1.str());
        case Cmd::Kind::Let: {
            if (auto v = as_value(c->c1)) {
                out.rule = "Let";
                return substitute(c->c2, c->binder, *v);
            }
            CmdPtr n = step(c->c1);
            if (!n) return nullptr;
            return Cmd::let_(c->binder, std::move(n), c->c2);
        }
        case Cmd::Kind::If: {
            if (auto v = as_value(c->c1)) {
                if (!v->is_bool()) return stuck("condition is not a boolean: " + v->str());
                if (v->as_bool()) {
                    out.rule = "IfTrue";
                    return c->c2;
                }
                out.rule = "IfFalse";
                return Cmd::value(Value::unit());
            }
            CmdPtr n = step(c->c1);
            if (!n) return nullptr;
            return Cmd::if_(std::move(n), c->c2);
        }
        case Cmd::Kind::While:
            out.rule = "While";
            return Cmd::if_(c->c1, c);
        case Cmd::Kind::Fork: {
            ThreadId child = m.fresh_tid();
            m.threads.emplace(child, c->c1);
            out.rule = "Fork";
            out.forked = child;
            return Cmd::value(Value::unit());
        }
        case Cmd::Kind::Alloc: {
            auto v = eval_expr(c->e1);
            if (!v) return stuck("allocation value does not evaluate: " + c->e1.str());
            HeapLoc l = m.fresh_loc();
            m.heap[l] = PlainCell{PlainCell::Kind::Cell, *v};
            out.rule = "Alloc";
            out.touched = l;
            return Cmd::value(Value::loc(l));
        }
        case Cmd::Kind::Read: {
            auto l = eval_loc(c->e1);
            if (!l) return stuck("read target is not a location: " + c->e1.str());
            auto it = m.heap.find(*l);
            if (it == m.heap.end() || it->second.kind != PlainCell::Kind::Cell) {
                return stuck("read of a non-cell");
            }
            out.rule = "Read";
            out.touched = *l;
            return Cmd::value(it->second.val);
        }
        case Cmd::Kind::Write: {
            auto l = eval_loc(c->e1);
            if (!l) return stuck("write target is not a location: " + c->e1.str());
            auto v = eval_expr(c->e2);
            if (!v) return stuck("written value does not evaluate: " + c->e2.str());
            auto it = m.heap.find(*l);
            if (it == m.heap.end() || it->second.kind != PlainCell::Kind::Cell) {
                return stuck("write to a non-cell");
            }
            if (it->second.val.is_list() && v->is_list()) {
                out.list_delta = static_cast<std::int64_t>(v->as_list().size()) -
                                 static_cast<std::int64_t>(it->second.val.as_list().size());
            }
            it->second.val = *v;
            out.rule = "Write";
            out.touched = *l;
            return Cmd::value(Value::unit());
        }
        case Cmd::Kind::NewMutex: {
            HeapLoc l = m.fresh_loc();
            m.heap[l] = PlainCell{PlainCell::Kind::MutexUnlocked, Value()};
            out.rule = "NewMutex";
            out.touched = l;
            return Cmd::value(Value::loc(l));
        }
        case Cmd::Kind::Acquire: {
            auto l = eval_loc(c->e1);
            if (!l) return stuck("acquire target is not a location: " + c->e1.str());
            auto it = m.heap.find(*l);
            if (it == m.heap.end() || it->second.kind == PlainCell::Kind::Cell) {
                return stuck("acquire of a non-mutex");
            }
            if (it->second.kind == PlainCell::Kind::MutexLocked) return blocked();
            it->second.kind = PlainCell::Kind::MutexLocked;
            out.rule = "Acquire";
            out.touched = *l;
            return Cmd::value(Value::unit());
        }
        case Cmd::Kind::Release: {
            auto l = eval_loc(c->e1);
            if (!l) return stuck("release target is not a location: " + c->e1.str());
            auto it = m.heap.find(*l);
            if (it == m.heap.end() || it->second.kind == PlainCell::Kind::Cell) {
                return stuck("release of a non-mutex");
            }
            if (it->second.kind == PlainCell::Kind::MutexUnlocked) {
                return stuck("release of an unlocked mutex");
            }
            it->second.kind = PlainCell::Kind::MutexUnlocked;
            out.rule = "Release";
            out.touched = *l;
            return Cmd::value(Value::unit());
        }
        case Cmd::Kind::Ghost:
        case Cmd::Kind::WhileDecStarted:
        case Cmd::Kind::AwaitStarted:
            return stuck("annotated form in plain execution");
        }
        return stuck("unhandled command");
    }
};

bool blocked_rec(const PlainMachine& m, const CmdPtr& c) {
    switch (c->kind) {
    case Cmd::Kind::Let:
    case Cmd::Kind::If:
        if (as_value(c->c1)) return false;
        return blocked_rec(m, c->c1);
    case Cmd::Kind::Acquire: {
        auto v = eval_expr(c->e1);
        if (!v || !v->is_loc()) return false;
        auto it = m.heap.find(v->as_loc());
        return it != m.heap.end() && it->second.kind == PlainCell::Kind::MutexLocked;
    }
    default: return false;
    }
}

} // namespace

PlainStep tp_step(PlainMachine& m, ThreadId tid) {
    PlainStep out;
    auto it = m.threads.find(tid);
    if (it == m.threads.end()) {
        out.status = PlainStep::Status::Stuck;
        out.reason = "no such thread";
        return out;
    }
    if (auto v = as_value(it->second)) {
        out.rule = "Term";
        out.result = *v;
        m.threads.erase(it);
        return out;
    }
    Ctx cx{m, out};
    CmdPtr next = cx.step(it->second);
    if (out.status == PlainStep::Status::Stepped) it->second = std::move(next);
    return out;
}

bool plain_blocked(const PlainMachine& m, ThreadId tid) {
    auto it = m.threads.find(tid);
    if (it == m.threads.end()) return false;
    if (as_value(it->second)) return false;
    return blocked_rec(m, it->second);
}

std::string plain_heap_digest(const PlainHeap& h) {
    std::ostringstream s;
    for (const auto& [l, cell] : h) {
        s << l.idx << ":";
        switch (cell.kind) {
        case PlainCell::Kind::Cell: s << cell.val.str(); break;
        case PlainCell::Kind::MutexUnlocked: s << "unlocked"; break;
        case PlainCell::Kind::MutexLocked: s << "locked"; break;
        }
        s << ";";
    }
    std::uint64_t hash = 1469598103934665603ull;
    for (char c : s.str()) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 1099511628211ull;
    }
    std::ostringstream out;
    out << std::hex << hash;
    return out.str();
}

} // namespace gsv
