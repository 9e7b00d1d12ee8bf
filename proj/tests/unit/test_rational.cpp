#include <doctest.h>

#include <stdexcept>

#include "gsv/rational.hpp"

using gsv::Rational;

TEST_SUITE("rational") {

TEST_CASE("construction normalizes") {
    CHECK(Rational(2, 4) == Rational(1, 2));
    CHECK(Rational(-2, -4) == Rational(1, 2));
    CHECK(Rational(2, -4) == Rational(-1, 2));
    CHECK(Rational(0, 5) == Rational(0));
    CHECK(Rational(0, 5).den() == 1);
    CHECK_THROWS_AS(Rational(1, 0), std::domain_error);
}

TEST_CASE("arithmetic") {
    CHECK(Rational(1, 2) + Rational(1, 3) == Rational(5, 6));
    CHECK(Rational(1, 2) - Rational(1, 2) == Rational(0));
    CHECK(Rational(2, 3) * Rational(3, 4) == Rational(1, 2));
    CHECK(Rational(1, 2) / Rational(1, 4) == Rational(2));
    CHECK(-Rational(1, 2) == Rational(-1, 2));
    CHECK_THROWS_AS(Rational(1) / Rational(0), std::domain_error);
}

TEST_CASE("comparison") {
    CHECK(Rational(1, 3) < Rational(1, 2));
    CHECK(Rational(-1, 2) < Rational(0));
    CHECK(Rational(7, 7) == Rational(1));
    CHECK(Rational(2, 3) > Rational(1, 2));
    CHECK(Rational(1, 2) <= Rational(1, 2));
}

TEST_CASE("large intermediate values cancel") {
    Rational big(1, 3037000499LL);
    Rational sum = big + big;
    CHECK(sum == Rational(2, 3037000499LL));
    // Products that would overflow before reduction still work when the
    // result is representable.
    Rational a(3037000499LL, 2);
    Rational b(2, 3037000499LL);
    CHECK(a * b == Rational(1));
}

TEST_CASE("overflow reports instead of wrapping") {
    Rational huge(9223372036854775807LL);
    CHECK_THROWS_AS(huge + Rational(1), std::overflow_error);
    CHECK_THROWS_AS(huge * Rational(2), std::overflow_error);
}

TEST_CASE("printing") {
    CHECK(Rational(1, 2).str() == "1/2");
    CHECK(Rational(5).str() == "5");
    CHECK(Rational(-3, 4).str() == "-3/4");
}

}
