#pragma once

#include <cstdint>
#include <compare>
#include <stdexcept>
#include <string>

namespace gsv {

// Exact rational over int64, always normalized (gcd 1, positive denominator).
// Intermediate products use __int128 and throw on int64 overflow; permission
// accounting at tool scale never comes close to that.
class Rational {
public:
    constexpr Rational() : num_(0), den_(1) {}
    Rational(std::int64_t n) : num_(n), den_(1) {}
    Rational(std::int64_t n, std::int64_t d);

    static Rational zero() { return Rational(0); }
    static Rational one() { return Rational(1); }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    bool is_zero() const { return num_ == 0; }
    bool is_integer() const { return den_ == 1; }

    Rational operator+(const Rational& o) const;
    Rational operator-(const Rational& o) const;
    Rational operator*(const Rational& o) const;
    Rational operator/(const Rational& o) const;
    Rational operator-() const { return Rational(-num_, den_); }

    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }

    bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
    std::strong_ordering operator<=>(const Rational& o) const;

    std::string str() const;

private:
    std::int64_t num_;
    std::int64_t den_;
};

} // namespace gsv
