#pragma once

#include <map>
#include <optional>
#include <string>

#include "gsv/assertion.hpp"
#include "gsv/foundations.hpp"
#include "gsv/value.hpp"

namespace gsv {

// A resource a thread can own a fraction of. Coefficients live in the
// enclosing LogHeap map; the resource itself is the map key. Identity is
// the full payload (for mutex chunks that includes the protected invariant,
// compared structurally), captured once in a canonical key string.
struct LogResource {
    enum class Kind { PointsTo, Uninit, MutexRes, LockedRes, SignalRes, UninitSig, ObsRes };

    Kind kind = Kind::PointsTo;
    HeapLoc loc;          // PointsTo / Uninit / MutexRes / LockedRes
    Value val;            // PointsTo
    Level level = 0;      // MutexRes / LockedRes / SignalRes
    std::string inv_name; // MutexRes / LockedRes
    AssertionPtr inv;     // MutexRes / LockedRes (closed)
    Fraction held;        // LockedRes: mutex fraction consumed by the holder
    SignalId sig = 0;     // SignalRes / UninitSig
    bool state = false;   // SignalRes
    ObligationBag obs;    // ObsRes

    static LogResource points_to(HeapLoc l, Value v);
    static LogResource uninit(HeapLoc l);
    static LogResource mutex_res(HeapLoc l, Level lev, std::string name, AssertionPtr inv);
    static LogResource locked_res(HeapLoc l, Level lev, std::string name, AssertionPtr inv,
                                  Fraction held);
    static LogResource signal_res(SignalId id, Level lev, bool state);
    static LogResource uninit_sig(SignalId id);
    static LogResource obs_res(ObligationBag bag);

    const std::string& key() const { return key_; }
    bool operator==(const LogResource& o) const { return key_ == o.key_; }
    bool operator<(const LogResource& o) const { return key_ < o.key_; }

private:
    std::string key_;
    void finish();
};

// Fractional ownership map. All stored coefficients are strictly positive;
// lh_add erases entries that reach zero and rejects negative results.
using LogHeap = std::map<LogResource, Rational>;

void lh_add(LogHeap& h, const LogResource& r, const Rational& coeff);
void lh_merge(LogHeap& h, const LogHeap& other);
LogHeap lh_scale(const LogHeap& h, const Rational& k);

// Pointwise difference; requires b <= a.
LogHeap lh_sub(const LogHeap& a, const LogHeap& b);

// No two positive chunks contradict each other: a location is one kind of
// thing with total fractions in bounds, a signal has one level and state,
// obligation chunks come in whole units.
bool lh_consistent(const LogHeap& h, std::string* why = nullptr);

// Exactly one obligation chunk, owned in full. (Every thread-view heap must
// satisfy this.)
bool lh_complete_thread(const LogHeap& h, std::string* why = nullptr);

// The obligation bag of the unique full obligation chunk, empty if absent.
ObligationBag lh_obligations(const LogHeap& h);

std::string lh_str(const LogHeap& h);

} // namespace gsv
