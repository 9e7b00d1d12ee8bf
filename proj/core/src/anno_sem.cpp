#include "gsv/anno_sem.hpp"

#include <sstream>

#include "gsv/erase.hpp"
#include "gsv/models.hpp"

namespace gsv {

namespace {

constexpr std::uint64_t kSignalIdSpace = 1'000'000;

DerefFn heap_reader(const LogHeap& h) {
    return [&h](HeapLoc l) -> std::optional<Value> {
        for (const auto& [r, q] : h) {
            if (r.kind == LogResource::Kind::PointsTo && r.loc == l) return r.val;
        }
        return std::nullopt;
    };
}

// Swaps the thread's full obligation chunk for one carrying `bag`.
void replace_obs(LogHeap& h, const ObligationBag& bag) {
    std::optional<LogResource> old;
    for (const auto& [r, q] : h) {
        if (r.kind == LogResource::Kind::ObsRes) {
            old = r;
            break;
        }
    }
    if (old) lh_add(h, *old, Rational(-1));
    lh_add(h, LogResource::obs_res(bag), Rational(1));
}

Rational coeff_of(const LogHeap& h, const LogResource& r) {
    auto it = h.find(r);
    return it == h.end() ? Rational(0) : it->second;
}

} // namespace

AnnoMachine AnnoMachine::boot(const CmdPtr& main) {
    AnnoMachine m;
    AnnoThread t;
    t.cmd = main;
    lh_add(t.local, LogResource::obs_res({}), Rational(1));
    m.threads.emplace(0, std::move(t));
    m.shadow = PlainMachine::boot(erase_annotations(main));
    return m;
}

ThreadId AnnoMachine::fresh_tid() const {
    ThreadId id = 0;
    for (const auto& [tid, _] : threads) {
        if (tid != id) break;
        ++id;
    }
    return id;
}

SignalId AnnoMachine::fresh_signal(ThreadId tid) {
    std::uint64_t n = sig_counters[tid]++;
    return tid * kSignalIdSpace + n;
}

DerefFn AnnoMachine::ghost_reader(ThreadId tid) const {
    return [this, tid](HeapLoc l) -> std::optional<Value> {
        auto it = threads.find(tid);
        if (it == threads.end()) return std::nullopt;
        for (const auto& [r, q] : it->second.local) {
            if (r.kind == LogResource::Kind::PointsTo && r.loc == l) return r.val;
        }
        return std::nullopt;
    };
}

namespace {

// Result of one annotated step. Stutter steps adjust logical state only and
// leave the plain shadow untouched.
struct AOut {
    PlainStep::Status status = PlainStep::Status::Stepped;
    bool stutter = false;
    std::string rule;
    std::string reason;
    std::optional<ThreadId> forked;
    std::optional<std::pair<std::int64_t, std::int64_t>> wait_signal;
    std::optional<SignalId> set_signal;
    std::optional<HeapLoc> touched;
    std::optional<std::int64_t> list_delta;
    std::optional<Value> result;
};

struct ACtx {
    AnnoMachine& m;
    AnnoThread& th;
    ThreadId tid;
    AOut& out;

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

    std::optional<Value> ghost_eval(const Expr& e) {
        DerefFn reader = m.ghost_reader(tid);
        return eval_expr(e, &reader);
    }

    std::optional<Level> ghost_level(const Expr& e) {
        auto v = ghost_eval(e);
        if (!v || !v->is_int() || v->as_int() < 0) return std::nullopt;
        return static_cast<Level>(v->as_int());
    }

    ObligationBag bag() const { return lh_obligations(th.local); }

    void bag_add(const Obligation& ob) {
        ObligationBag b = bag();
        b.add(ob);
        replace_obs(th.local, b);
    }

    bool bag_remove(const Obligation& ob) {
        ObligationBag b = bag();
        if (b.remove(ob) == 0) return false;
        replace_obs(th.local, b);
        return true;
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
        case Cmd::Kind::While: return step_while(c);
        case Cmd::Kind::WhileDecStarted: {
            if (c->bound == 0) return stuck("loop bound exhausted");
            out.rule = "WhileDec";
            return Cmd::if_(c->c1, Cmd::while_dec_started(c->bound - 1, c->c1));
        }
        case Cmd::Kind::AwaitStarted: {
            if (!th.pending_wait) {
                return stuck("await loop repeated without a justifying wait");
            }
            out.rule = "Await";
            out.wait_signal = *th.pending_wait;
            th.pending_wait.reset();
            return Cmd::if_(await_expansion_gated(c->await_items, c->e1, c->c1), c);
        }
        case Cmd::Kind::Fork: return step_fork(c);
        case Cmd::Kind::Alloc: {
            auto v = eval_expr(c->e1);
            if (!v) return stuck("allocation value does not evaluate: " + c->e1.str());
            HeapLoc l = m.fresh_loc();
            AnnoCell cell;
            cell.kind = AnnoCell::Kind::Cell;
            cell.val = *v;
            m.heap[l] = std::move(cell);
            lh_add(th.local, LogResource::points_to(l, *v), Rational(1));
            out.rule = "Alloc";
            out.touched = l;
            return Cmd::value(Value::loc(l));
        }
        case Cmd::Kind::Read: {
            auto l = eval_loc(c->e1);
            if (!l) return stuck("read target is not a location: " + c->e1.str());
            auto it = m.heap.find(*l);
            if (it == m.heap.end() || it->second.kind != AnnoCell::Kind::Cell) {
                return stuck("read of a non-cell");
            }
            LogResource chunk = LogResource::points_to(*l, it->second.val);
            if (coeff_of(th.local, chunk) <= Rational(0)) {
                return stuck("read of a cell the thread does not own");
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
            if (it == m.heap.end() || it->second.kind != AnnoCell::Kind::Cell) {
                return stuck("write to a non-cell");
            }
            LogResource old_chunk = LogResource::points_to(*l, it->second.val);
            if (!(coeff_of(th.local, old_chunk) == Rational(1))) {
                return stuck("write requires full ownership of the cell");
            }
            if (it->second.val.is_list() && v->is_list()) {
                out.list_delta = static_cast<std::int64_t>(v->as_list().size()) -
                                 static_cast<std::int64_t>(it->second.val.as_list().size());
            }
            lh_add(th.local, old_chunk, Rational(-1));
            lh_add(th.local, LogResource::points_to(*l, *v), Rational(1));
            it->second.val = *v;
            out.rule = "Write";
            out.touched = *l;
            return Cmd::value(Value::unit());
        }
        case Cmd::Kind::NewMutex: {
            HeapLoc l = m.fresh_loc();
            AnnoCell cell;
            cell.kind = AnnoCell::Kind::Uninit;
            m.heap[l] = std::move(cell);
            lh_add(th.local, LogResource::uninit(l), Rational(1));
            out.rule = "NewMutex";
            out.touched = l;
            return Cmd::value(Value::loc(l));
        }
        case Cmd::Kind::Acquire: return step_acquire(c);
        case Cmd::Kind::Release: return step_release(c);
        case Cmd::Kind::Ghost: return step_ghost(c);
        }
        return stuck("unhandled command");
    }

    CmdPtr step_while(const CmdPtr& c) {
        switch (c->anno.kind) {
        case LoopAnno::Kind::None:
            return stuck("loop without a termination annotation");
        case LoopAnno::Kind::Dec: {
            auto v = ghost_eval(c->anno.dec);
            if (!v || !v->is_int() || v->as_int() < 0) {
                return stuck("loop bound does not evaluate to a non-negative integer: " +
                             c->anno.dec.str());
            }
            out.stutter = true;
            out.rule = "WhileDecInit";
            return Cmd::while_dec_started(static_cast<std::uint64_t>(v->as_int()), c->c1);
        }
        case LoopAnno::Kind::Await: {
            out.rule = "AwaitInit";
            CmdPtr started =
                Cmd::await_started(c->anno.signals, c->anno.mutex, c->anno.body);
            return Cmd::if_(
                await_expansion_gated(c->anno.signals, c->anno.mutex, c->anno.body),
                std::move(started));
        }
        }
        return stuck("unhandled loop annotation");
    }

    CmdPtr step_fork(const CmdPtr& c) {
        std::vector<AssertionPtr> atoms;
        ObligationBag donated;
        bool has_obs = false;
        if (c->give) {
            if (!is_or_free(c->give)) {
                return stuck("fork donation may not contain disjunctions");
            }
            std::vector<AssertionPtr> parts;
            flatten_star(c->give, parts);
            for (const auto& a : parts) {
                if (a->kind != Assertion::Kind::Obs) {
                    atoms.push_back(a);
                    continue;
                }
                if (has_obs) return stuck("fork donation may name at most one obligation set");
                has_obs = true;
                DerefFn reader = m.ghost_reader(tid);
                for (const auto& item : a->obs) {
                    auto lev = eval_expr(item.level, &reader);
                    auto tgt = eval_expr(item.target, &reader);
                    if (!lev || !lev->is_int() || lev->as_int() < 0 || !tgt) {
                        return stuck("fork donation: obligation set does not evaluate");
                    }
                    Level level = static_cast<Level>(lev->as_int());
                    if (item.is_mutex) {
                        if (!tgt->is_loc()) {
                            return stuck("fork donation: obligation set does not evaluate");
                        }
                        donated.add(Obligation::mutex(tgt->as_loc(), level));
                    } else {
                        if (!tgt->is_int() || tgt->as_int() < 0) {
                            return stuck("fork donation: obligation set does not evaluate");
                        }
                        donated.add(
                            Obligation::signal(static_cast<SignalId>(tgt->as_int()), level));
                    }
                }
            }
        }
        ObligationBag mine = bag();
        if (!mine.contains(donated)) {
            return stuck("fork donates obligations the thread does not hold");
        }
        DerefFn reader = m.ghost_reader(tid);
        std::string why;
        auto rem = carve(th.local, Assertion::star_all(atoms), &why, &reader);
        if (!rem) return stuck("fork donation is not available: " + why);
        LogHeap carved = lh_sub(th.local, *rem);
        LogHeap parent = std::move(*rem);
        replace_obs(parent, bag_subtract(mine, donated));
        LogHeap child_local = std::move(carved);
        lh_add(child_local, LogResource::obs_res(donated), Rational(1));

        th.local = std::move(parent);
        ThreadId child = m.fresh_tid();
        AnnoThread ct;
        ct.cmd = c->c1;
        ct.local = std::move(child_local);
        m.threads.emplace(child, std::move(ct));
        out.rule = "Fork";
        out.forked = child;
        return Cmd::value(Value::unit());
    }

    CmdPtr step_acquire(const CmdPtr& c) {
        auto l = eval_loc(c->e1);
        if (!l) return stuck("acquire target is not a location: " + c->e1.str());
        auto it = m.heap.find(*l);
        if (it == m.heap.end() || it->second.kind == AnnoCell::Kind::Cell) {
            return stuck("acquire of a non-mutex");
        }
        AnnoCell& cell = it->second;
        if (cell.kind == AnnoCell::Kind::Uninit) {
            return stuck("acquire of an uninitialized mutex");
        }
        if (cell.kind == AnnoCell::Kind::Locked) return blocked();

        LogResource key = LogResource::mutex_res(*l, cell.level, cell.inv_name, cell.inv);
        Rational q = coeff_of(th.local, key);
        if (q <= Rational(0)) return stuck("acquire without a share of the mutex");
        if (!level_below_bag(cell.level, bag())) {
            return stuck("acquire: mutex level not below all held obligations");
        }
        lh_add(th.local, key, -q);
        Fraction held(q);
        lh_add(th.local,
               LogResource::locked_res(*l, cell.level, cell.inv_name, cell.inv, held),
               Rational(1));
        lh_merge(th.local, cell.prot);
        bag_add(Obligation::mutex(*l, cell.level));

        cell.kind = AnnoCell::Kind::Locked;
        cell.prot.clear();
        cell.consumed = held;
        out.rule = "Acquire";
        out.touched = *l;
        return Cmd::value(Value::unit());
    }

    CmdPtr step_release(const CmdPtr& c) {
        auto l = eval_loc(c->e1);
        if (!l) return stuck("release target is not a location: " + c->e1.str());
        auto it = m.heap.find(*l);
        if (it == m.heap.end() || it->second.kind == AnnoCell::Kind::Cell) {
            return stuck("release of a non-mutex");
        }
        AnnoCell& cell = it->second;
        if (cell.kind == AnnoCell::Kind::Uninit) {
            return stuck("release of an uninitialized mutex");
        }
        if (cell.kind == AnnoCell::Kind::Unlocked) {
            return stuck("release of an unlocked mutex");
        }

        LogResource lk =
            LogResource::locked_res(*l, cell.level, cell.inv_name, cell.inv, cell.consumed);
        if (!(coeff_of(th.local, lk) == Rational(1))) {
            return stuck("release without the locked chunk");
        }
        LogHeap rest = th.local;
        lh_add(rest, lk, Rational(-1));

        DerefFn reader = heap_reader(rest);
        std::string why;
        auto rem = carve(rest, cell.inv, &why, &reader);
        if (!rem) return stuck("release: mutex invariant does not hold: " + why);
        LogHeap donated = lh_sub(rest, *rem);

        th.local = std::move(*rem);
        ObligationBag b = bag();
        if (b.remove(Obligation::mutex(*l, cell.level)) == 0) {
            return stuck("release of a mutex the thread does not owe");
        }
        replace_obs(th.local, b);
        lh_add(th.local, LogResource::mutex_res(*l, cell.level, cell.inv_name, cell.inv),
               cell.consumed.value());

        cell.kind = AnnoCell::Kind::Unlocked;
        cell.prot = std::move(donated);
        cell.consumed = Fraction();
        out.rule = "Release";
        out.touched = *l;
        return Cmd::value(Value::unit());
    }

    CmdPtr step_ghost(const CmdPtr& c) {
        const GhostCmd& g = c->ghost;
        out.stutter = true;
        switch (g.kind) {
        case GhostCmd::Kind::NewSignal: {
            auto lev = ghost_level(g.a);
            if (!lev) {
                return stuck("signal level does not evaluate to a non-negative integer: " +
                             g.a.str());
            }
            SignalId id = m.fresh_signal(tid);
            m.signals[id] = SigState{true, *lev, false};
            lh_add(th.local, LogResource::signal_res(id, *lev, false), Rational(1));
            bag_add(Obligation::signal(id, *lev));
            out.rule = "NewSignal";
            if (g.binder == "_") return c->c1;
            return substitute(c->c1, g.binder, Value::integer(static_cast<std::int64_t>(id)));
        }
        case GhostCmd::Kind::SetSignal: {
            auto v = ghost_eval(g.a);
            if (!v || !v->is_int() || v->as_int() < 0) {
                return stuck("set_signal target does not evaluate to a signal id");
            }
            SignalId id = static_cast<SignalId>(v->as_int());
            auto it = m.signals.find(id);
            if (it == m.signals.end() || !it->second.initialized) {
                return stuck("set_signal of an unknown signal");
            }
            SigState& s = it->second;
            LogResource chunk = LogResource::signal_res(id, s.level, false);
            if (!(coeff_of(th.local, chunk) == Rational(1))) {
                return stuck("set_signal requires the full unset signal chunk");
            }
            if (!bag_remove(Obligation::signal(id, s.level))) {
                return stuck("set_signal without the matching obligation");
            }
            lh_add(th.local, chunk, Rational(-1));
            lh_add(th.local, LogResource::signal_res(id, s.level, true), Rational(1));
            s.set = true;
            out.rule = "SetSignal";
            out.set_signal = id;
            return c->c1;
        }
        case GhostCmd::Kind::MutInit: {
            auto lv = ghost_eval(g.a);
            if (!lv || !lv->is_loc()) {
                return stuck("mutex initialization target is not a location");
            }
            HeapLoc l = lv->as_loc();
            auto lev = ghost_level(g.b);
            if (!lev) {
                return stuck("mutex level does not evaluate to a non-negative integer");
            }
            if (!g.inv) return stuck("mutex initialization needs an invariant");
            if (assertion_has_obs(g.inv)) {
                return stuck("mutex invariant may not mention obligations");
            }
            auto it = m.heap.find(l);
            if (it == m.heap.end() || it->second.kind != AnnoCell::Kind::Uninit) {
                return stuck("mutex initialization of a location that is not a fresh mutex");
            }
            LogResource un = LogResource::uninit(l);
            if (!(coeff_of(th.local, un) == Rational(1))) {
                return stuck("mutex initialization requires the uninitialized mutex chunk");
            }
            LogHeap rest = th.local;
            lh_add(rest, un, Rational(-1));
            DerefFn reader = heap_reader(rest);
            std::string why;
            auto rem = carve(rest, g.inv, &why, &reader);
            if (!rem) return stuck("mutex initialization: invariant does not hold: " + why);
            LogHeap donated = lh_sub(rest, *rem);

            th.local = std::move(*rem);
            lh_add(th.local, LogResource::mutex_res(l, *lev, g.inv_name, g.inv), Rational(1));
            AnnoCell& cell = it->second;
            cell.kind = AnnoCell::Kind::Unlocked;
            cell.level = *lev;
            cell.inv_name = g.inv_name;
            cell.inv = g.inv;
            cell.prot = std::move(donated);
            out.rule = "MutInit";
            out.touched = l;
            return c->c1;
        }
        case GhostCmd::Kind::AllocSignalId: {
            SignalId id = m.fresh_signal(tid);
            m.signals[id] = SigState{false, 0, false};
            lh_add(th.local, LogResource::uninit_sig(id), Rational(1));
            out.rule = "AllocSigId";
            if (g.binder == "_") return c->c1;
            return substitute(c->c1, g.binder, Value::integer(static_cast<std::int64_t>(id)));
        }
        case GhostCmd::Kind::InitSignal: {
            auto v = ghost_eval(g.a);
            if (!v || !v->is_int() || v->as_int() < 0) {
                return stuck("init_signal target does not evaluate to a signal id");
            }
            SignalId id = static_cast<SignalId>(v->as_int());
            auto lev = ghost_level(g.b);
            if (!lev) {
                return stuck("signal level does not evaluate to a non-negative integer: " +
                             g.b.str());
            }
            auto it = m.signals.find(id);
            if (it == m.signals.end() || it->second.initialized) {
                return stuck("init_signal of an unknown or already initialized signal id");
            }
            LogResource un = LogResource::uninit_sig(id);
            if (!(coeff_of(th.local, un) == Rational(1))) {
                return stuck("init_signal requires the full reservation chunk");
            }
            lh_add(th.local, un, Rational(-1));
            lh_add(th.local, LogResource::signal_res(id, *lev, false), Rational(1));
            bag_add(Obligation::signal(id, *lev));
            it->second = SigState{true, *lev, false};
            out.rule = "InitSignal";
            if (g.binder == "_") return c->c1;
            return substitute(c->c1, g.binder, Value::integer(static_cast<std::int64_t>(id)));
        }
        case GhostCmd::Kind::AwaitGate: {
            auto v = ghost_eval(g.a);
            if (!v || !v->is_bool()) {
                return stuck("await gate: loop result is not a boolean");
            }
            out.rule = "AwaitGate";
            if (v->as_bool()) return c->c1; // loop exits; no wait to justify

            auto ml = ghost_eval(g.gate_mutex);
            if (!ml || !ml->is_loc()) {
                return stuck("await gate: mutex does not evaluate to a location");
            }
            HeapLoc awaited = ml->as_loc();
            ObligationBag held = bag();
            bool level_failure = false;
            for (const auto& item : g.gate_items) {
                auto idv = ghost_eval(item.id);
                auto lv = ghost_eval(item.level);
                if (!idv || !idv->is_int() || idv->as_int() < 0) continue;
                if (!lv || !lv->is_int() || lv->as_int() < 0) continue;
                SignalId id = static_cast<SignalId>(idv->as_int());
                Level lev = static_cast<Level>(lv->as_int());
                auto it = m.signals.find(id);
                if (it == m.signals.end() || !it->second.initialized || it->second.set) continue;
                if (it->second.level != lev) continue;
                bool ok = true;
                for (const auto& [ob, n] : held.entries()) {
                    (void)n;
                    if (ob.is_mutex() && std::get<HeapLoc>(ob.target) == awaited) continue;
                    if (!(lev < ob.level)) {
                        ok = false;
                        break;
                    }
                }
                if (!ok) {
                    level_failure = true;
                    continue;
                }
                th.pending_wait = std::make_pair(static_cast<std::int64_t>(id),
                                                 static_cast<std::int64_t>(lev));
                return c->c1;
            }
            return stuck(level_failure
                             ? "await: signal level not below all held obligations"
                             : "await: no admissible signal to wait for");
        }
        }
        return stuck("unhandled ghost command");
    }
};

bool ablocked_rec(const AnnoMachine& m, const CmdPtr& c) {
    switch (c->kind) {
    case Cmd::Kind::Let:
    case Cmd::Kind::If:
        if (as_value(c->c1)) return false;
        return ablocked_rec(m, c->c1);
    case Cmd::Kind::Acquire: {
        auto v = eval_expr(c->e1);
        if (!v || !v->is_loc()) return false;
        auto it = m.heap.find(v->as_loc());
        return it != m.heap.end() && it->second.kind == AnnoCell::Kind::Locked;
    }
    default: return false;
    }
}

bool anno_blocked(const AnnoMachine& m, ThreadId tid) {
    auto it = m.threads.find(tid);
    if (it == m.threads.end()) return false;
    if (as_value(it->second.cmd)) return false;
    return ablocked_rec(m, it->second.cmd);
}

AOut astep(AnnoMachine& m, ThreadId tid, const AnnoOptions& opts, std::uint64_t step,
           std::vector<ObligationLeak>& leaks) {
    AOut out;
    auto it = m.threads.find(tid);
    if (it == m.threads.end()) {
        out.status = PlainStep::Status::Stuck;
        out.reason = "no such thread";
        return out;
    }
    AnnoThread& th = it->second;
    if (auto v = as_value(th.cmd)) {
        ObligationBag b = lh_obligations(th.local);
        if (!b.empty()) {
            if (opts.mode == AnnoMode::Verify) {
                out.status = PlainStep::Status::Stuck;
                out.reason =
                    "obligation leaked at thread termination: " + obligation_bag_str(b);
                return out;
            }
            leaks.push_back(ObligationLeak{tid, step, b});
        }
        m.retired.push_back(th.local);
        m.threads.erase(it);
        out.rule = "Term";
        out.result = *v;
        return out;
    }
    ACtx cx{m, th, tid, out};
    CmdPtr next = cx.step(th.cmd);
    if (out.status == PlainStep::Status::Stepped) th.cmd = std::move(next);
    return out;
}

bool rules_align(const std::string& anno_rule, const std::string& plain_rule) {
    if (anno_rule == "WhileDec" || anno_rule == "Await" || anno_rule == "AwaitInit") {
        return plain_rule == "While";
    }
    return anno_rule == plain_rule;
}

} // namespace

std::string anno_invariant_violation(const AnnoMachine& m) {
    std::string why;
    // Every running thread owns exactly one full obligation chunk.
    for (const auto& [tid, th] : m.threads) {
        if (!lh_complete_thread(th.local, &why)) {
            return "thread " + std::to_string(tid) + ": " + why;
        }
    }
    // All logical resources anywhere combine into one consistent heap.
    LogHeap total;
    for (const auto& [tid, th] : m.threads) lh_merge(total, th.local);
    for (const auto& [l, cell] : m.heap) {
        if (cell.kind == AnnoCell::Kind::Unlocked) lh_merge(total, cell.prot);
    }
    for (const auto& r : m.retired) lh_merge(total, r);
    if (!lh_consistent(total, &why)) return "combined logical heap: " + why;

    // The logical chunks account for the machine state exactly.
    LogHeap expected;
    for (const auto& [l, cell] : m.heap) {
        switch (cell.kind) {
        case AnnoCell::Kind::Cell:
            lh_add(expected, LogResource::points_to(l, cell.val), Rational(1));
            break;
        case AnnoCell::Kind::Uninit:
            lh_add(expected, LogResource::uninit(l), Rational(1));
            break;
        case AnnoCell::Kind::Unlocked:
            lh_add(expected, LogResource::mutex_res(l, cell.level, cell.inv_name, cell.inv),
                   Rational(1));
            break;
        case AnnoCell::Kind::Locked:
            lh_add(expected,
                   LogResource::locked_res(l, cell.level, cell.inv_name, cell.inv,
                                           cell.consumed),
                   Rational(1));
            if (!cell.consumed.is_full()) {
                lh_add(expected,
                       LogResource::mutex_res(l, cell.level, cell.inv_name, cell.inv),
                       Rational(1) - cell.consumed.value());
            }
            break;
        }
    }
    for (const auto& [id, s] : m.signals) {
        if (s.initialized) {
            lh_add(expected, LogResource::signal_res(id, s.level, s.set), Rational(1));
        } else {
            lh_add(expected, LogResource::uninit_sig(id), Rational(1));
        }
    }
    LogHeap owned;
    for (const auto& [r, q] : total) {
        if (r.kind != LogResource::Kind::ObsRes) owned[r] = q;
    }
    if (!(owned == expected)) {
        return "logical chunks do not account for the machine state: owned " + lh_str(owned) +
               " vs expected " + lh_str(expected);
    }

    // The plain shadow sees the same physical world.
    if (m.next_loc != m.shadow.next_loc) return "allocators diverged";
    if (m.heap.size() != m.shadow.heap.size()) return "heap domains diverged";
    for (const auto& [l, cell] : m.heap) {
        auto it = m.shadow.heap.find(l);
        if (it == m.shadow.heap.end()) return "heap domains diverged at " + Value::loc(l).str();
        const PlainCell& p = it->second;
        bool ok = false;
        switch (cell.kind) {
        case AnnoCell::Kind::Cell:
            ok = p.kind == PlainCell::Kind::Cell && p.val == cell.val;
            break;
        case AnnoCell::Kind::Uninit:
        case AnnoCell::Kind::Unlocked:
            ok = p.kind == PlainCell::Kind::MutexUnlocked;
            break;
        case AnnoCell::Kind::Locked:
            ok = p.kind == PlainCell::Kind::MutexLocked;
            break;
        }
        if (!ok) return "heap cells diverged at " + Value::loc(l).str();
    }
    if (m.threads.size() != m.shadow.threads.size()) return "thread pools diverged";
    for (const auto& [tid, th] : m.threads) {
        auto it = m.shadow.threads.find(tid);
        if (it == m.shadow.threads.end()) {
            return "thread " + std::to_string(tid) + " missing from the shadow";
        }
        if (!cmd_equal(erase_annotations(th.cmd), it->second)) {
            return "thread " + std::to_string(tid) + " diverged from its erasure";
        }
    }
    return "";
}

AnnoRunResult run_annotated(const CmdPtr& main, Scheduler& sched, const AnnoOptions& opts) {
    AnnoRunResult res;
    res.machine = AnnoMachine::boot(main);
    AnnoMachine& m = res.machine;

    for (std::uint64_t step = 0; step < opts.max_steps; ++step) {
        if (m.threads.empty()) {
            res.status = RunStatus::Terminated;
            res.steps = step;
            return res;
        }
        std::vector<ThreadId> enabled, blocked_now;
        for (const auto& [tid, _] : m.threads) {
            (anno_blocked(m, tid) ? blocked_now : enabled).push_back(tid);
        }
        if (enabled.empty()) {
            res.status = RunStatus::Stuck;
            res.steps = step;
            res.stuck = StuckReport{blocked_now.front(), step, "all threads are blocked"};
            return res;
        }
        ThreadId tid = sched.pick(enabled, step);
        CmdPtr before = m.threads.at(tid).cmd;
        AOut out = astep(m, tid, opts, step, res.leaks);
        if (out.status == PlainStep::Status::Blocked) {
            res.status = RunStatus::Stuck;
            res.steps = step;
            res.stuck = StuckReport{tid, step, "scheduler picked a blocked thread"};
            return res;
        }
        if (out.status == PlainStep::Status::Stuck) {
            res.status = RunStatus::Stuck;
            res.steps = step;
            res.stuck = StuckReport{tid, step, out.reason};
            return res;
        }
        if (!out.stutter) {
            PlainStep ps = tp_step(m.shadow, tid);
            std::string mismatch;
            if (ps.status != PlainStep::Status::Stepped) {
                mismatch = "shadow did not step: " + ps.reason;
            } else if (!rules_align(out.rule, ps.rule)) {
                mismatch = "rules diverged: " + out.rule + " vs " + ps.rule;
            } else if (out.forked != ps.forked || out.touched != ps.touched ||
                       out.list_delta != ps.list_delta) {
                mismatch = "effects diverged on rule " + out.rule;
            } else if (out.rule == "Term" &&
                       !(ps.result.has_value() && out.result.has_value() &&
                         *ps.result == *out.result)) {
                mismatch = "final values diverged";
            }
            if (!mismatch.empty()) {
                res.status = RunStatus::Stuck;
                res.steps = step;
                res.stuck = StuckReport{tid, step, "internal: " + mismatch};
                return res;
            }
        }
        auto still = m.threads.find(tid);
        if (still != m.threads.end()) {
            if (out.stutter) {
                if (++still->second.ghost_streak > opts.ghost_budget) {
                    res.status = RunStatus::Stuck;
                    res.steps = step;
                    res.stuck = StuckReport{
                        tid, step,
                        "ghost steps exceeded the stutter budget (divergent annotation?)"};
                    return res;
                }
            } else {
                still->second.ghost_streak = 0;
            }
        }
        if (opts.check_every_step) {
            std::string bad = anno_invariant_violation(m);
            if (!bad.empty()) {
                res.status = RunStatus::Stuck;
                res.steps = step;
                res.stuck = StuckReport{tid, step, "internal: " + bad};
                return res;
            }
        }
        if (opts.record_trace) {
            TraceStep ts;
            ts.index = step;
            ts.tid = tid;
            ts.rule = out.rule;
            ts.forked = out.forked;
            ts.wait_signal = out.wait_signal;
            ts.set_signal = out.set_signal;
            ts.touched = out.touched;
            ts.list_delta = out.list_delta;
            ts.blocked = blocked_now;
            ts.heap_digest = plain_heap_digest(m.shadow.heap);
            ts.cmd_before = before;
            res.trace.push_back(std::move(ts));
        }
        res.steps = step + 1;
    }
    res.status = RunStatus::Budget;
    return res;
}

} // namespace gsv
