#include "gsv/logheap.hpp"

#include <sstream>
#include <stdexcept>

namespace gsv {

namespace {

std::string frac_key(const Fraction& f) { return f.value().str(); }

} // namespace

void LogResource::finish() {
    std::ostringstream k;
    switch (kind) {
    case Kind::PointsTo: k << "pt/" << loc.idx << "/" << val.str(); break;
    case Kind::Uninit: k << "un/" << loc.idx; break;
    case Kind::MutexRes:
        k << "mx/" << loc.idx << "/" << level << "/" << inv_name << "/" << inv->str();
        break;
    case Kind::LockedRes:
        k << "lk/" << loc.idx << "/" << level << "/" << inv_name << "/" << frac_key(held) << "/"
          << inv->str();
        break;
    case Kind::SignalRes:
        k << "sg/" << sig << "/" << level << "/" << (state ? "set" : "unset");
        break;
    case Kind::UninitSig: k << "su/" << sig; break;
    case Kind::ObsRes: k << "ob/" << obligation_bag_str(obs); break;
    }
    key_ = k.str();
}

LogResource LogResource::points_to(HeapLoc l, Value v) {
    LogResource r;
    r.kind = Kind::PointsTo;
    r.loc = l;
    r.val = std::move(v);
    r.finish();
    return r;
}

LogResource LogResource::uninit(HeapLoc l) {
    LogResource r;
    r.kind = Kind::Uninit;
    r.loc = l;
    r.finish();
    return r;
}

LogResource LogResource::mutex_res(HeapLoc l, Level lev, std::string name, AssertionPtr inv) {
    LogResource r;
    r.kind = Kind::MutexRes;
    r.loc = l;
    r.level = lev;
    r.inv_name = std::move(name);
    r.inv = std::move(inv);
    r.finish();
    return r;
}

LogResource LogResource::locked_res(HeapLoc l, Level lev, std::string name, AssertionPtr inv,
                                    Fraction held) {
    LogResource r;
    r.kind = Kind::LockedRes;
    r.loc = l;
    r.level = lev;
    r.inv_name = std::move(name);
    r.inv = std::move(inv);
    r.held = held;
    r.finish();
    return r;
}

LogResource LogResource::signal_res(SignalId id, Level lev, bool state) {
    LogResource r;
    r.kind = Kind::SignalRes;
    r.sig = id;
    r.level = lev;
    r.state = state;
    r.finish();
    return r;
}

LogResource LogResource::uninit_sig(SignalId id) {
    LogResource r;
    r.kind = Kind::UninitSig;
    r.sig = id;
    r.finish();
    return r;
}

LogResource LogResource::obs_res(ObligationBag bag) {
    LogResource r;
    r.kind = Kind::ObsRes;
    r.obs = std::move(bag);
    r.finish();
    return r;
}

void lh_add(LogHeap& h, const LogResource& r, const Rational& coeff) {
    if (coeff.is_zero()) return;
    auto it = h.find(r);
    if (it == h.end()) {
        if (coeff < Rational(0)) throw std::domain_error("negative resource: " + r.key());
        h.emplace(r, coeff);
        return;
    }
    it->second += coeff;
    if (it->second.is_zero()) {
        h.erase(it);
    } else if (it->second < Rational(0)) {
        throw std::domain_error("negative resource: " + r.key());
    }
}

void lh_merge(LogHeap& h, const LogHeap& other) {
    for (const auto& [r, q] : other) lh_add(h, r, q);
}

LogHeap lh_scale(const LogHeap& h, const Rational& k) {
    LogHeap out;
    if (k.is_zero()) return out;
    for (const auto& [r, q] : h) out.emplace(r, q * k);
    return out;
}

LogHeap lh_sub(const LogHeap& a, const LogHeap& b) {
    LogHeap out = a;
    for (const auto& [r, q] : b) lh_add(out, r, -q);
    return out;
}

namespace {

bool fail(std::string* why, const std::string& msg) {
    if (why) *why = msg;
    return false;
}

} // namespace

bool lh_consistent(const LogHeap& h, std::string* why) {
    struct LocInfo {
        Rational pt, un, mx, lk;
        const LogResource* first_pt = nullptr;
        const LogResource* first_mx = nullptr;
        const LogResource* lk_res = nullptr;
    };
    struct SigInfo {
        Rational sg, su;
        const LogResource* first_sg = nullptr;
    };
    std::map<std::uint64_t, LocInfo> locs;
    std::map<SignalId, SigInfo> sigs;

    for (const auto& [r, q] : h) {
        if (!(q > Rational(0))) return fail(why, "non-positive coefficient: " + r.key());
        switch (r.kind) {
        case LogResource::Kind::PointsTo: {
            auto& L = locs[r.loc.idx];
            if (L.first_pt && !(L.first_pt->val == r.val)) {
                return fail(why, "two values at " + r.key());
            }
            if (!L.first_pt) L.first_pt = &r;
            L.pt += q;
            break;
        }
        case LogResource::Kind::Uninit: locs[r.loc.idx].un += q; break;
        case LogResource::Kind::MutexRes: {
            auto& L = locs[r.loc.idx];
            if (L.first_mx && !(L.first_mx->key() == r.key())) {
                return fail(why, "two mutex identities at " + r.key());
            }
            if (!L.first_mx) L.first_mx = &r;
            L.mx += q;
            break;
        }
        case LogResource::Kind::LockedRes: {
            auto& L = locs[r.loc.idx];
            if (L.lk_res && !(L.lk_res->key() == r.key())) {
                return fail(why, "two lock holders at " + r.key());
            }
            L.lk_res = &r;
            L.lk += q;
            break;
        }
        case LogResource::Kind::SignalRes: {
            auto& S = sigs[r.sig];
            if (S.first_sg && !(S.first_sg->key() == r.key())) {
                return fail(why, "conflicting signal chunks: " + r.key());
            }
            if (!S.first_sg) S.first_sg = &r;
            S.sg += q;
            break;
        }
        case LogResource::Kind::UninitSig: sigs[r.sig].su += q; break;
        case LogResource::Kind::ObsRes:
            if (!q.is_integer()) return fail(why, "fractional obligation chunk: " + r.key());
            break;
        }
    }

    for (const auto& [idx, L] : locs) {
        int kinds = (L.pt > Rational(0) ? 1 : 0) + (L.un > Rational(0) ? 1 : 0) +
                    (L.mx + L.lk > Rational(0) ? 1 : 0);
        std::string at = "loc" + std::to_string(idx);
        if (kinds > 1) return fail(why, "location used as two kinds of resource: " + at);
        if (L.pt > Rational(1)) return fail(why, "cell ownership above 1: " + at);
        if (L.un > Rational(1)) return fail(why, "uninit ownership above 1: " + at);
        if (L.lk > Rational(1)) return fail(why, "lock held more than once: " + at);
        Rational consumed = L.lk_res ? L.lk_res->held.value() : Rational(0);
        if (L.lk > Rational(0)) {
            if (L.mx > Rational(1) - consumed) {
                return fail(why, "mutex ownership above the unconsumed part: " + at);
            }
            if (L.lk_res && L.first_mx &&
                (L.lk_res->level != L.first_mx->level ||
                 !assertion_equal(L.lk_res->inv, L.first_mx->inv))) {
                return fail(why, "lock and mutex chunks disagree: " + at);
            }
        } else if (L.mx > Rational(1)) {
            return fail(why, "mutex ownership above 1: " + at);
        }
    }
    for (const auto& [id, S] : sigs) {
        std::string at = "signal " + std::to_string(id);
        if (S.sg > Rational(0) && S.su > Rational(0)) {
            return fail(why, "signal both initialized and not: " + at);
        }
        if (S.sg > Rational(1)) return fail(why, "signal ownership above 1: " + at);
        if (S.su > Rational(1)) return fail(why, "signal slot ownership above 1: " + at);
    }
    return true;
}

bool lh_complete_thread(const LogHeap& h, std::string* why) {
    const LogResource* found = nullptr;
    Rational coeff;
    for (const auto& [r, q] : h) {
        if (r.kind != LogResource::Kind::ObsRes) continue;
        if (found) return fail(why, "more than one obligation chunk");
        found = &r;
        coeff = q;
    }
    if (!found) return fail(why, "no obligation chunk");
    if (!(coeff == Rational(1))) return fail(why, "obligation chunk not owned in full");
    return true;
}

ObligationBag lh_obligations(const LogHeap& h) {
    for (const auto& [r, q] : h) {
        if (r.kind == LogResource::Kind::ObsRes) return r.obs;
    }
    return {};
}

std::string lh_str(const LogHeap& h) {
    std::ostringstream out;
    bool first = true;
    for (const auto& [r, q] : h) {
        if (!first) out << ", ";
        out << r.key() << " @" << q.str();
        first = false;
    }
    return out.str();
}

} // namespace gsv
