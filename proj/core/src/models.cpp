#include "gsv/models.hpp"

#include <vector>

namespace gsv {

namespace {

struct Carver {
    const DerefFn* reader = nullptr;
    std::string why;

    std::optional<Value> eval(const Expr& e) { return eval_expr(e, reader); }

    std::optional<HeapLoc> eval_loc(const Expr& e) {
        auto v = eval(e);
        if (!v || !v->is_loc()) return std::nullopt;
        return v->as_loc();
    }

    std::optional<Level> eval_level(const Expr& e) {
        auto v = eval(e);
        if (!v || !v->is_int() || v->as_int() < 0) return std::nullopt;
        return static_cast<Level>(v->as_int());
    }

    std::optional<SignalId> eval_sig(const Expr& e) {
        auto v = eval(e);
        if (!v || !v->is_int() || v->as_int() < 0) return std::nullopt;
        return static_cast<SignalId>(v->as_int());
    }

    std::optional<ObligationBag> eval_obs(const std::vector<ObsItem>& items) {
        ObligationBag bag;
        for (const auto& it : items) {
            auto lev = eval_level(it.level);
            if (!lev) return std::nullopt;
            if (it.is_mutex) {
                auto l = eval_loc(it.target);
                if (!l) return std::nullopt;
                bag.add(Obligation::mutex(*l, *lev));
            } else {
                auto id = eval_sig(it.target);
                if (!id) return std::nullopt;
                bag.add(Obligation::signal(*id, *lev));
            }
        }
        return bag;
    }

    bool miss(const std::string& msg) {
        if (why.empty()) why = msg;
        return false;
    }

    // Entries of h matching a chunk atom, paired with the coefficient to take.
    std::vector<LogResource> candidates(const LogHeap& h, const Assertion& a) {
        std::vector<LogResource> out;
        auto each = [&](auto&& pred) {
            for (const auto& [r, q] : h) {
                if (q >= a.frac.value() && pred(r)) out.push_back(r);
            }
        };
        switch (a.kind) {
        case Assertion::Kind::PointsTo: {
            std::optional<HeapLoc> l;
            if (!a.a1.wild) {
                l = eval_loc(a.a1.e);
                if (!l) break;
            }
            std::optional<Value> want;
            if (!a.a2.wild) {
                want = eval(a.a2.e);
                if (!want) break;
            }
            each([&](const LogResource& r) {
                return r.kind == LogResource::Kind::PointsTo && (!l || r.loc == *l) &&
                       (!want || r.val == *want);
            });
            break;
        }
        case Assertion::Kind::UninitCell: {
            std::optional<HeapLoc> l;
            if (!a.a1.wild) {
                l = eval_loc(a.a1.e);
                if (!l) break;
            }
            each([&](const LogResource& r) {
                return r.kind == LogResource::Kind::Uninit && (!l || r.loc == *l);
            });
            break;
        }
        case Assertion::Kind::MutexPart:
        case Assertion::Kind::LockedPart: {
            bool locked = a.kind == Assertion::Kind::LockedPart;
            std::optional<HeapLoc> l;
            if (!a.a1.wild) {
                l = eval_loc(a.a1.e);
                if (!l) break;
            }
            std::optional<Level> lev;
            if (!a.a2.wild) {
                lev = eval_level(a.a2.e);
                if (!lev) break;
            }
            each([&](const LogResource& r) {
                if (r.kind != (locked ? LogResource::Kind::LockedRes
                                      : LogResource::Kind::MutexRes)) {
                    return false;
                }
                if (l && !(r.loc == *l)) return false;
                if (lev && r.level != *lev) return false;
                if (r.inv_name != a.inv_name) return false;
                if (!assertion_equal(r.inv, a.inv)) return false;
                if (locked && !a.held_wild && !(r.held == a.held)) return false;
                return true;
            });
            break;
        }
        case Assertion::Kind::SignalPart: {
            std::optional<SignalId> id;
            if (!a.a1.wild) {
                id = eval_sig(a.a1.e);
                if (!id) break;
            }
            std::optional<Level> lev;
            if (!a.a2.wild) {
                lev = eval_level(a.a2.e);
                if (!lev) break;
            }
            std::optional<bool> state;
            if (!a.a3.wild) {
                auto v = eval(a.a3.e);
                if (!v || !v->is_bool()) break;
                state = v->as_bool();
            }
            each([&](const LogResource& r) {
                return r.kind == LogResource::Kind::SignalRes && (!id || r.sig == *id) &&
                       (!lev || r.level == *lev) && (!state || r.state == *state);
            });
            break;
        }
        case Assertion::Kind::UninitSigPart: {
            std::optional<SignalId> id;
            if (!a.a1.wild) {
                id = eval_sig(a.a1.e);
                if (!id) break;
            }
            each([&](const LogResource& r) {
                return r.kind == LogResource::Kind::UninitSig && (!id || r.sig == *id);
            });
            break;
        }
        default: break;
        }
        return out;
    }

    std::optional<LogHeap> run(LogHeap h, std::vector<AssertionPtr> todo, std::size_t i) {
        while (i < todo.size()) {
            const AssertionPtr& ap = todo[i];
            const Assertion& a = *ap;
            switch (a.kind) {
            case Assertion::Kind::Star: {
                std::vector<AssertionPtr> next(todo.begin(), todo.begin() + i);
                next.push_back(a.kids[0]);
                next.push_back(a.kids[1]);
                next.insert(next.end(), todo.begin() + i + 1, todo.end());
                todo = std::move(next);
                continue;
            }
            case Assertion::Kind::Or: {
                for (const auto& kid : a.kids) {
                    auto alt = todo;
                    alt[i] = kid;
                    if (auto m = run(h, std::move(alt), i)) return m;
                }
                miss("no disjunct matched");
                return std::nullopt;
            }
            case Assertion::Kind::BoolLit: {
                if (!a.bval) {
                    miss("false assertion");
                    return std::nullopt;
                }
                ++i;
                continue;
            }
            case Assertion::Kind::Pure: {
                auto v = eval(a.pure);
                if (!v || !v->is_bool() || !v->as_bool()) {
                    miss("pure condition not true: " + a.pure.str());
                    return std::nullopt;
                }
                ++i;
                continue;
            }
            case Assertion::Kind::Obs: {
                auto bag = eval_obs(a.obs);
                if (!bag) {
                    miss("obligation set does not evaluate");
                    return std::nullopt;
                }
                LogResource want = LogResource::obs_res(*bag);
                auto it = h.find(want);
                if (it == h.end() || it->second < Rational(1)) {
                    miss("missing obligation chunk " + want.key());
                    return std::nullopt;
                }
                lh_add(h, want, -Rational(1));
                ++i;
                continue;
            }
            default: {
                auto cands = candidates(h, a);
                if (cands.empty()) {
                    miss("missing chunk: " + a.str());
                    return std::nullopt;
                }
                if (cands.size() == 1) {
                    lh_add(h, cands[0], -a.frac.value());
                    ++i;
                    continue;
                }
                for (const auto& r : cands) {
                    LogHeap h2 = h;
                    lh_add(h2, r, -a.frac.value());
                    if (auto m = run(std::move(h2), todo, i + 1)) return m;
                }
                miss("no candidate choice works for: " + a.str());
                return std::nullopt;
            }
            }
        }
        return h;
    }
};

} // namespace

std::optional<LogHeap> carve(const LogHeap& h, const AssertionPtr& a, std::string* why,
                             const DerefFn* reader) {
    Carver c;
    c.reader = reader;
    auto got = c.run(h, {a ? a : Assertion::bool_lit(true)}, 0);
    if (!got && why) *why = c.why.empty() ? "assertion does not match heap" : c.why;
    return got;
}

bool models(const LogHeap& h, const AssertionPtr& a, std::string* why, const DerefFn* reader) {
    std::string carve_why;
    auto rem = carve(h, a, &carve_why, reader);
    if (!rem) {
        if (why) *why = carve_why;
        return false;
    }
    if (!rem->empty()) {
        if (why) *why = "heap has resources the assertion does not mention: " + lh_str(*rem);
        return false;
    }
    return true;
}

bool assertion_has_obs(const AssertionPtr& a) {
    if (!a) return false;
    if (a->kind == Assertion::Kind::Obs) return true;
    for (const auto& k : a->kids) {
        if (assertion_has_obs(k)) return true;
    }
    return false;
}

} // namespace gsv
