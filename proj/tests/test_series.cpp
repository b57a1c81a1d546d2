#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "flopdt/check.hpp"
#include "flopdt/series.hpp"

using namespace flopdt;

namespace {

ExponentLattice qlat() {
    return ExponentLattice(1, 24, 2, Rational(1), {Rational(0)});
}

ExponentLattice qtlat() {
    return ExponentLattice(1, 24, 2, Rational(1), {Rational(1, 2)});
}

FormalSeries mono(const ExponentLattice& lat, const Rational& q,
                  const Rational& t, const Rational& c) {
    return FormalSeries::monomial(lat, lat.key(q, {t}), CycNumber(c));
}

} // namespace

TEST_CASE("monomial and coefficient access") {
    auto lat = qtlat();
    FormalSeries s = mono(lat, Rational(1, 3), Rational(1, 2), Rational(5));
    CHECK(s.coefficient(lat.key(Rational(1, 3), {Rational(1, 2)})) ==
          CycNumber(5));
    CHECK(s.coefficient(lat.zero_key()).is_zero());
    CHECK(s.valid_to() == Grade::infinity());
    CHECK(s.min_grade() == Grade(Rational(1, 3) + Rational(1, 4)));
}

TEST_CASE("coefficient beyond the validity bound is refused") {
    auto lat = qlat();
    FormalSeries s = FormalSeries::one(lat, Grade(Rational(2)));
    CHECK(s.coefficient(lat.q_key(Rational(2))).is_zero());
    CHECK_THROWS_AS(s.coefficient(lat.q_key(Rational(49, 24))),
                    PrecisionError);
}

TEST_CASE("set_term prunes zeros and terms beyond the bound") {
    auto lat = qlat();
    FormalSeries s = FormalSeries::zero(lat, Grade(Rational(1)));
    s.set_term(lat.q_key(Rational(3)), CycNumber(7)); // beyond bound: dropped
    s.set_term(lat.q_key(Rational(1, 2)), CycNumber(0));
    CHECK(s.is_zero());
    s.set_term(lat.q_key(Rational(1, 2)), CycNumber(2));
    CHECK(s.terms().size() == 1);
}

TEST_CASE("addition takes the weaker bound") {
    auto lat = qlat();
    FormalSeries a = FormalSeries::one(lat, Grade(Rational(3)));
    FormalSeries b = mono(lat, Rational(2), Rational(0), Rational(1))
                         .truncated(Grade(Rational(5, 2)));
    FormalSeries s = a + b;
    CHECK(s.valid_to() == Grade(Rational(5, 2)));
    CHECK(s.coefficient(lat.q_key(Rational(2))) == CycNumber(1));
    FormalSeries d = s - s;
    CHECK(d.is_zero());
    CHECK(d.valid_to() == Grade(Rational(5, 2)));
}

TEST_CASE("multiplication validity uses the effective minimum grade") {
    auto lat = qlat();
    // a = q^{-1} + ..., valid to 2; b = 1 + ..., valid to 3
    FormalSeries a = mono(lat, Rational(-1), Rational(0), Rational(1))
                         .truncated(Grade(Rational(2)));
    FormalSeries b = FormalSeries::one(lat).truncated(Grade(Rational(3)));
    FormalSeries p = FormalSeries::mul(a, b, Grade::infinity());
    // min(2 + 0, 3 + (-1)) = 2
    CHECK(p.valid_to() == Grade(Rational(2)));

    // a truncated zero is not "min grade +infinity": its unknown tail starts
    // at its bound, so the product bound must stay finite
    FormalSeries z = FormalSeries::zero(lat, Grade(Rational(1)));
    FormalSeries q = FormalSeries::mul(z, a, Grade::infinity());
    CHECK(q.valid_to() == Grade(Rational(0)));
    CHECK(q.is_zero());

    // exact zero absorbs completely
    FormalSeries ez = FormalSeries::zero(lat);
    CHECK(FormalSeries::mul(ez, a, Grade::infinity()).valid_to() ==
          Grade::infinity());
}

TEST_CASE("product of exact polynomials is exact") {
    auto lat = qlat();
    FormalSeries a = FormalSeries::one(lat);
    a.set_term(lat.q_key(Rational(1)), CycNumber(-1)); // 1 - q
    FormalSeries b = FormalSeries::one(lat);
    b.set_term(lat.q_key(Rational(1)), CycNumber(1)); // 1 + q
    FormalSeries p = a * b;
    CHECK(p.valid_to() == Grade::infinity());
    CHECK(p.coefficient(lat.q_key(Rational(2))) == CycNumber(-1));
    CHECK(p.coefficient(lat.q_key(Rational(1))).is_zero());
    CHECK(p.terms().size() == 2);
}

TEST_CASE("geometric inverse") {
    auto lat = qlat();
    FormalSeries a = FormalSeries::one(lat, Grade(Rational(6)));
    a.set_term(lat.q_key(Rational(1)), CycNumber(-1)); // 1 - q valid to 6
    FormalSeries inv = series_inverse_unit(a);
    CHECK(inv.valid_to() == Grade(Rational(6)));
    for (int n = 0; n <= 6; ++n)
        CHECK(inv.coefficient(lat.q_key(Rational(n))) == CycNumber(1));
    FormalSeries p = a * inv;
    CHECK(series_equal(p, FormalSeries::one(lat, p.valid_to())));
}

TEST_CASE("inverse of a shifted unit pays the leading grade twice") {
    auto lat = qtlat();
    // a = 2 q^{1/2} t (grade 1) * (1 + q), valid to 4
    FormalSeries m = mono(lat, Rational(1, 2), Rational(1), Rational(2));
    FormalSeries u = FormalSeries::one(lat, Grade(Rational(4)));
    u.set_term(lat.q_key(Rational(1)), CycNumber(1));
    FormalSeries a = m * u;
    CHECK(a.valid_to() == Grade(Rational(5)));
    FormalSeries inv = series_inverse_unit(a);
    CHECK(inv.valid_to() == Grade(Rational(5) - Rational(2)));
    FormalSeries p = FormalSeries::mul(a, inv, Grade::infinity());
    CHECK(series_equal(p, FormalSeries::one(lat, p.valid_to())));
    // leading term of the inverse: (1/2) q^{-1/2} t^{-1}
    CHECK(inv.coefficient(lat.key(Rational(-1, 2), {Rational(-1)})) ==
          CycNumber(Rational(1, 2)));
}

TEST_CASE("inverse needs a unique minimal term") {
    auto lat = qtlat();
    FormalSeries a = mono(lat, Rational(1), Rational(-1), Rational(1)) +
                     mono(lat, Rational(1, 2), Rational(0), Rational(1));
    // both terms have grade 1/2
    CHECK_THROWS_AS(series_inverse_unit(a.truncated(Grade(Rational(3)))),
                    DomainError);
    CHECK_THROWS_AS(series_inverse_unit(FormalSeries::zero(lat)), DomainError);
}

TEST_CASE("pure monomial inverts exactly") {
    auto lat = qtlat();
    FormalSeries m = mono(lat, Rational(3, 8), Rational(-2), Rational(-4));
    FormalSeries inv = series_inverse_unit(m);
    CHECK(inv.valid_to() == Grade::infinity());
    CHECK((m * inv).coefficient(lat.zero_key()).is_one());
}

TEST_CASE("exp and log round trip") {
    auto lat = qtlat();
    FormalSeries f = mono(lat, Rational(1), Rational(0), Rational(2)) +
                     mono(lat, Rational(1, 2), Rational(1), Rational(-3)) +
                     mono(lat, Rational(2), Rational(-2), Rational(1, 3));
    f = f.truncated(Grade(Rational(5)));
    FormalSeries e = series_exp(f);
    CHECK(e.coefficient(lat.zero_key()).is_one());
    FormalSeries back = series_log(e);
    CHECK(series_equal(back, f));
    // exp turns sums into products
    FormalSeries g = mono(lat, Rational(3, 2), Rational(1), Rational(1))
                         .truncated(Grade(Rational(5)));
    CHECK(series_equal(series_exp(f + g),
                       FormalSeries::mul(series_exp(f), series_exp(g),
                                         Grade(Rational(5)))));
}

TEST_CASE("exp and log guard their domains") {
    auto lat = qtlat();
    FormalSeries bad = mono(lat, Rational(0), Rational(-1), Rational(1));
    CHECK_THROWS_AS(series_exp(bad.truncated(Grade(Rational(2)))), DomainError);
    FormalSeries not_one = FormalSeries::one(lat).scaled(CycNumber(2));
    CHECK_THROWS_AS(series_log(not_one.truncated(Grade(Rational(2)))),
                    DomainError);
    CHECK(series_exp(FormalSeries::zero(lat)).coefficient(lat.zero_key())
              .is_one());
    CHECK(series_log(FormalSeries::one(lat)).is_zero());
}

TEST_CASE("integer powers match repeated multiplication") {
    auto lat = qtlat();
    FormalSeries f = FormalSeries::one(lat, Grade(Rational(4)));
    f.set_term(lat.key(Rational(1), {Rational(1)}), CycNumber(2));
    f.set_term(lat.key(Rational(1), {Rational(-1)}), CycNumber(-1));
    FormalSeries p5 = series_int_pow(f, 5);
    FormalSeries slow = f;
    for (int i = 1; i < 5; ++i) slow = slow * f;
    CHECK(series_equal(p5, slow));
    FormalSeries pm2 = series_int_pow(f, -2);
    FormalSeries check = FormalSeries::mul(pm2, series_int_pow(f, 2),
                                           Grade::infinity());
    CHECK(series_equal(check, FormalSeries::one(lat, check.valid_to())));
    CHECK(series_int_pow(f, 0).coefficient(lat.zero_key()).is_one());
}

TEST_CASE("binomial power of one plus a monomial") {
    auto lat = qtlat();
    ExponentKey k = lat.key(Rational(1, 2), {Rational(1)});
    FormalSeries direct = FormalSeries::one(lat, Grade(Rational(6)));
    direct.set_term(k, CycNumber(Rational(2, 3)));
    for (long long e : {1LL, 2LL, 7LL, -1LL, -3LL}) {
        FormalSeries closed = pow_one_plus_monomial(
            lat, CycNumber(Rational(2, 3)), k, e, Grade(Rational(6)));
        FormalSeries slow = series_int_pow(direct, e, Grade(Rational(6)));
        INFO("exponent " << e);
        CHECK(series_equal(closed, slow));
    }
    // negative grade monomial with negative exponent has infinite expansion
    ExponentKey neg = lat.key(Rational(-1), {Rational(0)});
    CHECK_THROWS_AS(pow_one_plus_monomial(lat, CycNumber(1), neg, -1,
                                          Grade(Rational(2))),
                    ChamberError);
    // but a positive power is a finite polynomial
    FormalSeries fine = pow_one_plus_monomial(lat, CycNumber(1), neg, 3,
                                              Grade::infinity());
    CHECK(fine.coefficient(lat.q_key(Rational(-3))).is_one());
    CHECK(fine.coefficient(lat.q_key(Rational(-2))) == CycNumber(3));
}

TEST_CASE("lattice substitution relabels exponents") {
    auto src = qtlat();
    // double every exponent: q_den stays, t flips sign
    auto dst = ExponentLattice(1, 24, 2, Rational(2), {Rational(-1)});
    FormalSeries f = mono(src, Rational(1, 2), Rational(3, 2), Rational(5))
                         .truncated(Grade(Rational(4)));
    FormalSeries g = series_substitute_lattice(f, Rational(0), {{-1}}, dst);
    CHECK(g.coefficient(dst.key(Rational(1, 2), {Rational(-3, 2)})) ==
          CycNumber(5));
    // target grading = 2*q - t = 2*(source grading), so the ball doubles
    CHECK(g.valid_to() == Grade(Rational(8)));
    FormalSeries h = series_substitute_lattice(f, Rational(1, 24), {{-1}}, dst);
    CHECK(h.valid_to() == Grade(Rational(8) + Rational(2, 24)));
    CHECK_THROWS_AS(series_substitute_lattice(f, Rational(1, 48), {{-1}}, dst),
                    UsageError);
    CHECK_THROWS_AS(series_substitute_lattice(f, Rational(0), {{0}}, dst),
                    UsageError);
}

TEST_CASE("elliptic shift sends t to q t") {
    auto lat = qtlat();
    FormalSeries f = mono(lat, Rational(0), Rational(1), Rational(1)) +
                     mono(lat, Rational(0), Rational(-1), Rational(2));
    FormalSeries g = series_elliptic_shift(f, 0);
    CHECK(g.coefficient(lat.key(Rational(1), {Rational(1)})) == CycNumber(1));
    CHECK(g.coefficient(lat.key(Rational(-1), {Rational(-1)})) == CycNumber(2));
    // validity drops by w_q * (most negative t exponent)
    FormalSeries ft = f.truncated(Grade(Rational(3)));
    CHECK(series_elliptic_shift(ft, 0).valid_to() == Grade(Rational(2)));
}

TEST_CASE("product stream expands a finite factor list") {
    auto lat = qlat();
    // prod (1 + q^n t^0) with multiplicity pattern; here plain q-monomials
    std::vector<ProductFactor> factors;
    for (int n = 1; n <= 8; ++n) {
        FormalSeries f = FormalSeries::one(lat);
        f.set_term(lat.q_key(Rational(n)), CycNumber(1));
        factors.push_back({f, 1});
    }
    FormalSeries p = series_product_stream(lat, Grade(Rational(6)),
                                           factor_list_stream(factors));
    // partitions into distinct parts: 1,1,1,2,2,3,4,5 for n=0..7  (p(6)=4)
    std::vector<int> distinct{1, 1, 1, 2, 2, 3, 4};
    for (int n = 0; n <= 6; ++n)
        CHECK(p.coefficient(lat.q_key(Rational(n))) ==
              CycNumber(distinct[static_cast<std::size_t>(n)]));
    CHECK(p.valid_to() == Grade(Rational(6)));
}

TEST_CASE("product stream rejects wrong chambers and orderings") {
    auto lat = qtlat();
    FormalSeries bad = FormalSeries::one(lat);
    bad.set_term(lat.key(Rational(0), {Rational(-1)}), CycNumber(1));
    CHECK_THROWS_AS(
        series_product_stream(lat, Grade(Rational(2)),
                              factor_list_stream({{bad, 1}})),
        ChamberError);
    FormalSeries f1 = FormalSeries::one(lat);
    f1.set_term(lat.q_key(Rational(2)), CycNumber(1));
    FormalSeries f2 = FormalSeries::one(lat);
    f2.set_term(lat.q_key(Rational(1)), CycNumber(1));
    CHECK_THROWS_AS(
        series_product_stream(lat, Grade(Rational(4)),
                              factor_list_stream({{f1, 1}, {f2, 1}})),
        UsageError);
}

TEST_CASE("mismatch reporting") {
    auto lat = qlat();
    FormalSeries a = FormalSeries::one(lat, Grade(Rational(3)));
    FormalSeries b = a;
    b.set_term(lat.q_key(Rational(2)), CycNumber(1));
    auto miss = series_first_mismatch(a, b);
    REQUIRE(miss.has_value());
    CHECK(lat.q_exponent(*miss) == Rational(2));
    auto report = compare_series(a, b);
    CHECK_FALSE(report.ok);
    CHECK(report.detail.find("mismatch") != std::string::npos);
    // differences beyond the common bound are invisible
    FormalSeries c = a;
    c.set_term(lat.q_key(Rational(4)), CycNumber(9));
    CHECK(series_equal(a, c));
    CHECK(compare_series(a, c).ok);
}

TEST_CASE("ring axioms on pseudo random series") {
    auto lat = qtlat();
    std::mt19937 rng(20240817u);
    std::uniform_int_distribution<int> qd(-2, 6), td(-3, 3), cd(-4, 4);
    auto random_series = [&]() {
        FormalSeries s = FormalSeries::zero(lat, Grade(Rational(4)));
        for (int i = 0; i < 6; ++i) {
            Rational q(qd(rng), 2);
            Rational t(td(rng), 2);
            int c = cd(rng);
            ExponentKey k = lat.key(q, {t});
            s.set_term(k, s.coefficient(k) + CycNumber(c));
        }
        return s;
    };
    for (int round = 0; round < 25; ++round) {
        FormalSeries a = random_series();
        FormalSeries b = random_series();
        FormalSeries c = random_series();
        CHECK(series_equal((a + b) + c, a + (b + c)));
        CHECK(series_equal(a + b, b + a));
        CHECK(series_equal(a * b, b * a));
        CHECK(series_equal((a * b) * c, a * (b * c)));
        CHECK(series_equal(a * (b + c), a * b + a * c));
        CHECK(series_equal(a * FormalSeries::one(lat), a));
        CHECK(series_equal(a + FormalSeries::zero(lat), a));
    }
}
