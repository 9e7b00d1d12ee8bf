#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>

#include "gsv/bag.hpp"
#include "gsv/rational.hpp"

namespace gsv {

// Levels order blocking dependencies: a thread may only wait for something
// that sits strictly below everything it still owes.
using Level = std::uint64_t;

using SignalId = std::uint64_t;

// Heap locations are allocator-issued and never reused.
struct HeapLoc {
    std::uint64_t idx = 0;
    bool operator==(const HeapLoc&) const = default;
    auto operator<=>(const HeapLoc&) const = default;
};

struct Signal {
    SignalId id = 0;
    Level level = 0;
    bool operator==(const Signal&) const = default;
    auto operator<=>(const Signal&) const = default;
};

// An obligation is a promise to either set a signal or release a mutex
// (identified by its heap location), pinned at that resource's level.
struct Obligation {
    std::variant<SignalId, HeapLoc> target;
    Level level = 0;

    static Obligation signal(Signal s) { return {s.id, s.level}; }
    static Obligation signal(SignalId id, Level lev) { return {id, lev}; }
    static Obligation mutex(HeapLoc l, Level lev) { return {l, lev}; }

    bool is_signal() const { return std::holds_alternative<SignalId>(target); }
    bool is_mutex() const { return std::holds_alternative<HeapLoc>(target); }

    bool operator==(const Obligation&) const = default;
    auto operator<=>(const Obligation&) const = default;

    std::string str() const;
};

using ObligationBag = Bag<Obligation>;

// Fraction of a resource: exact rational in (0, 1].
class Fraction {
public:
    Fraction() : q_(1) {}
    explicit Fraction(Rational q) : q_(q) {
        if (!(q > Rational(0) && q <= Rational(1)))
            throw std::domain_error("fraction outside (0,1]: " + q.str());
    }
    Fraction(std::int64_t n, std::int64_t d) : Fraction(Rational(n, d)) {}

    const Rational& value() const { return q_; }
    bool is_full() const { return q_ == Rational(1); }

    bool operator==(const Fraction&) const = default;

private:
    Rational q_;
};

// True iff lev sits strictly below the level of every obligation in the bag.
bool level_below_bag(Level lev, const ObligationBag& bag);

std::string obligation_bag_str(const ObligationBag& bag);

} // namespace gsv
