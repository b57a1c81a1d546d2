#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "flopdt/cyclotomic.hpp"

using namespace flopdt;

TEST_CASE("euler phi small values") {
    CHECK(euler_phi(1) == 1);
    CHECK(euler_phi(2) == 1);
    CHECK(euler_phi(3) == 2);
    CHECK(euler_phi(4) == 2);
    CHECK(euler_phi(6) == 2);
    CHECK(euler_phi(8) == 4);
    CHECK(euler_phi(12) == 4);
    CHECK(euler_phi(30) == 8);
    CHECK(euler_phi(360) == 96);
}

// Independent oracle: the cyclotomic polynomials must factor x^M - 1 as
// prod_{d | M} Phi_d(x), checked by direct polynomial multiplication.
TEST_CASE("cyclotomic polynomials factor x^M - 1") {
    for (unsigned M = 1; M <= 30; ++M) {
        std::vector<Rational> prod{Rational(1)};
        for (unsigned d = 1; d <= M; ++d) {
            if (M % d != 0) continue;
            const auto& phi = detail::cyclotomic_polynomial(d);
            std::vector<Rational> next(prod.size() + phi.size() - 1, Rational(0));
            for (std::size_t i = 0; i < prod.size(); ++i)
                for (std::size_t j = 0; j < phi.size(); ++j)
                    next[i + j] += prod[i] * phi[j];
            prod = std::move(next);
        }
        REQUIRE(prod.size() == M + 1);
        CHECK(prod[0] == Rational(-1));
        CHECK(prod[M] == Rational(1));
        for (unsigned i = 1; i < M; ++i) CHECK(prod[i] == Rational(0));
    }
}

TEST_CASE("roots of unity multiply by adding powers") {
    CycNumber z = CycNumber::root_of_unity(5, 1);
    CycNumber acc = CycNumber(1);
    for (int i = 0; i < 5; ++i) acc = acc * z;
    CHECK(acc.is_one());
    CHECK(CycNumber::root_of_unity(5, 2) * CycNumber::root_of_unity(5, 4) ==
          CycNumber::root_of_unity(5, 6));
    CHECK(CycNumber::root_of_unity(7, 7).is_one());
    CHECK(CycNumber::root_of_unity(2, 1) == CycNumber(-1));
}

TEST_CASE("mixed orders embed into the lcm field") {
    CycNumber a = CycNumber::root_of_unity(3, 1);
    CycNumber b = CycNumber::root_of_unity(4, 1);
    CHECK(a * b == CycNumber::root_of_unity(12, 7));
    CHECK(a + b - b == a);
    CycNumber sum = CycNumber(0);
    for (int k = 1; k <= 4; ++k) sum = sum + CycNumber::root_of_unity(5, k);
    CHECK(sum.is_rational());
    CHECK(sum.to_rational() == Rational(-1));
}

TEST_CASE("half turn branch convention") {
    CHECK(CycNumber::half_turn(Rational(0)).is_one());
    CHECK(CycNumber::half_turn(Rational(1)) == CycNumber(-1));
    CHECK(CycNumber::half_turn(Rational(1, 2)) == CycNumber::i_power(1));
    CHECK(CycNumber::half_turn(Rational(-1, 2)) == CycNumber::i_power(-1));
    CHECK(CycNumber::i_power(1) * CycNumber::i_power(1) == CycNumber(-1));
    // additivity across mixed denominators
    Rational r1(2, 3), r2(3, 5);
    CHECK(CycNumber::half_turn(r1) * CycNumber::half_turn(r2) ==
          CycNumber::half_turn(r1 + r2));
    CHECK(CycNumber::half_turn(Rational(2)) == CycNumber(1));
}

TEST_CASE("inverse via extended euclid") {
    CycNumber z = CycNumber::root_of_unity(5, 1);
    CycNumber x = CycNumber(2) + z.scaled(Rational(3)) - z * z * z;
    CHECK((x * x.inverse()).is_one());
    CHECK(z.inverse() == CycNumber::root_of_unity(5, 4));
    CycNumber r(Rational(-7, 3));
    CHECK((r * r.inverse()).is_one());
    CHECK_THROWS_AS(CycNumber(0).inverse(), DomainError);
}

TEST_CASE("rational collapse and accessors") {
    CycNumber z6 = CycNumber::root_of_unity(6, 1);
    // zeta_6 + zeta_6^5 = 1
    CHECK((z6 + z6.inverse()).to_rational() == Rational(1));
    CHECK(CycNumber(Rational(5, 2)).is_rational());
    CHECK_FALSE(z6.is_rational());
    CHECK(CycNumber(1).is_one());
    CHECK((z6 - z6).is_zero());
}

TEST_CASE("order cap guards field growth") {
    unsigned cap = cyclotomic_order_cap();
    CHECK_THROWS_AS(CycNumber::root_of_unity(cap + 1, 1), CapacityError);
    CHECK_THROWS_AS(CycNumber::half_turn(Rational(1, 600)), CapacityError);
}

TEST_CASE("string form is stable for small fields") {
    CHECK(CycNumber(Rational(3, 2)).str() == "3/2");
    CycNumber z = CycNumber::root_of_unity(4, 1);
    CHECK(z.str().find("cyc4") != std::string::npos);
}
