#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <utility>
#include <vector>

#include "flopdt/blowup.hpp"

using namespace flopdt;

namespace {

CycNumber coeff_at(const FormalSeries& s, long long q_num, std::int64_t t_num) {
    ExponentKey k{q_num, {t_num}};
    return s.coefficient(k);
}

FormalSeries q_poly(const std::vector<std::pair<long long, long long>>& terms) {
    ExponentLattice lat = blowup_lattice();
    FormalSeries out = FormalSeries::zero(lat);
    for (const auto& [power, value] : terms)
        out.set_term(lat.q_key(Rational(power)), CycNumber(value));
    return out;
}

} // namespace

TEST_CASE("blow-up multiplier leading terms") {
    FormalSeries one_sheet = blowup_error(1, Grade(Rational(4)));
    // q^{1/12} (t^{1/2} + t^{-1/2}) + higher corrections
    CHECK(coeff_at(one_sheet, 2, 1) == CycNumber(1));
    CHECK(coeff_at(one_sheet, 2, -1) == CycNumber(1));
    CHECK(coeff_at(one_sheet, 26, 1) == CycNumber(1));
    CHECK(coeff_at(one_sheet, 26, 3) == CycNumber(1));
    CHECK(coeff_at(one_sheet, 50, 1) == CycNumber(2));
    CHECK(coeff_at(one_sheet, 50, 3) == CycNumber(1));
    CHECK(coeff_at(one_sheet, 74, 1) == CycNumber(3));
    CHECK(coeff_at(one_sheet, 2, 3) == CycNumber(0));

    FormalSeries two_sheets = blowup_error(2, Grade(Rational(3)));
    // q^{1/6} (t + 2 + t^{-1}) + higher corrections
    CHECK(coeff_at(two_sheets, 4, 2) == CycNumber(1));
    CHECK(coeff_at(two_sheets, 4, 0) == CycNumber(2));
    CHECK(coeff_at(two_sheets, 4, -2) == CycNumber(1));
    CHECK(coeff_at(two_sheets, 4, 4) == CycNumber(0));

    CHECK(blowup_error(0, Grade(Rational(2))).coefficient(
              blowup_lattice().zero_key()) == CycNumber(1));
    CHECK_THROWS_AS(blowup_error(-1, Grade(Rational(2))), UsageError);
    CHECK_THROWS_AS(blowup_error(1, Grade::infinity()), UsageError);
}

TEST_CASE("multiplier symmetry and parity of the exceptional exponents") {
    for (long long r = 1; r <= 4; ++r) {
        FormalSeries mult = blowup_error(r, Grade(Rational(6)));
        for (const auto& [k, c] : mult.terms()) {
            // invariant under t -> 1/t
            ExponentKey mirrored = k;
            mirrored.t_num[0] = -k.t_num[0];
            CHECK(mult.coefficient(mirrored) == c);
            // half-integral exponents exactly when the rank is odd
            CHECK((k.t_num[0] - r) % 2 == 0);
        }
    }
}

TEST_CASE("multiplier is multiplicative in the rank") {
    Grade order{Rational(5)};
    std::vector<std::pair<long long, long long>> splits = {{1, 1}, {1, 2}, {2, 2}};
    for (const auto& [r1, r2] : splits) {
        FormalSeries joint = blowup_error(r1 + r2, order);
        FormalSeries split =
            FormalSeries::mul(blowup_error(r1, order), blowup_error(r2, order),
                              order);
        auto mismatch = series_first_mismatch(joint, split);
        CHECK_FALSE(mismatch.has_value());
    }
}

TEST_CASE("squared theta against a direct double sum") {
    ExponentLattice lat = blowup_lattice();
    Grade order{Rational(6)};
    ThetaArgument arg;
    arg.direction = {lat.t_denominator()};
    arg.scale = 1;
    FormalSeries theta = theta_sum(lat, 1, 0, arg, order);
    FormalSeries squared = FormalSeries::mul(theta, theta, order);

    // independent accumulation: q^{(u1^2 + u2^2)/8} t^{(u1 + u2)/2} over odd
    // u1, u2, truncated by the q-grade alone
    std::map<std::pair<long long, std::int64_t>, long long> oracle;
    for (long long u1 = -15; u1 <= 15; u1 += 2)
        for (long long u2 = -15; u2 <= 15; u2 += 2) {
            Rational q_exp = Rational(u1 * u1 + u2 * u2, 8);
            if (q_exp > 6) continue;
            Rational scaled = q_exp * lat.q_denominator();
            long long q_num = static_cast<long long>(numerator(scaled));
            oracle[{q_num, u1 + u2}] += 1;
        }
    for (const auto& [cell, count] : oracle)
        CHECK(coeff_at(squared, cell.first, cell.second) == CycNumber(count));
    for (const auto& [k, c] : squared.terms())
        CHECK(CycNumber(oracle[{k.q_num, k.t_num[0]}]) == c);
}

TEST_CASE("transform read-off on frozen inputs") {
    Grade order{Rational(4)};

    SurfaceDTSeries unit;
    FormalSeries moved = blowup_transform(unit, order);
    CHECK(blowup_cell(moved, 1, 0, Rational(0)) == CycNumber(1));
    CHECK(blowup_cell(moved, 1, 1, Rational(1, 2)) == CycNumber(1));
    CHECK(blowup_cell(moved, 1, 1, Rational(0)) == CycNumber(0));

    SurfaceDTSeries pair;
    pair.rank = 2;
    FormalSeries paired = blowup_transform(pair, order);
    CHECK(blowup_cell(paired, 2, 0, Rational(0)) == CycNumber(1));
    CHECK(blowup_cell(paired, 2, -1, Rational(1, 2)) == CycNumber(2));
    CHECK(blowup_cell(paired, 2, -2, Rational(1)) == CycNumber(1));

    SurfaceDTSeries rich;
    rich.series = q_poly({{0, 1}, {1, 3}});
    FormalSeries moved_rich = blowup_transform(rich, order);
    CHECK(blowup_cell(moved_rich, 1, 0, Rational(0)) == CycNumber(1));
    CHECK(blowup_cell(moved_rich, 1, 0, Rational(1)) == CycNumber(4));
    CHECK(blowup_cell(moved_rich, 1, 1, Rational(1, 2)) == CycNumber(1));
    CHECK(blowup_cell(moved_rich, 1, 1, Rational(0)) == CycNumber(0));

    SurfaceDTSeries empty;
    empty.series = FormalSeries::zero(blowup_lattice());
    CHECK(blowup_transform(empty, order).is_zero());

    CHECK_THROWS_AS(blowup_cell(moved, 1, 0, Rational(40)), PrecisionError);

    SurfaceDTSeries bad;
    bad.rank = 0;
    CHECK_THROWS_AS(blowup_transform(bad, order), UsageError);
    SurfaceDTSeries mixed;
    mixed.series = FormalSeries::monomial(
        blowup_lattice(), ExponentKey{0, {2}}, CycNumber(1));
    CHECK_THROWS_AS(blowup_transform(mixed, order), UsageError);
    SurfaceDTSeries shallow;
    shallow.series = q_poly({{0, 1}}).truncated(Grade(Rational(1)));
    CHECK_THROWS_AS(blowup_transform(shallow, order), PrecisionError);
}

TEST_CASE("cell table is a faithful regrading of the product") {
    Grade order{Rational(4)};
    SurfaceDTSeries input;
    input.rank = 2;
    input.series = q_poly({{0, 2}, {2, -1}});
    FormalSeries moved = blowup_transform(input, order);

    std::vector<BlowupCell> table = blowup_cells(moved, input.rank);
    CHECK(table.size() == moved.terms().size());
    for (const auto& cell : table)
        CHECK(blowup_cell(moved, input.rank, cell.a, cell.s) == cell.value);
    for (std::size_t i = 1; i < table.size(); ++i) {
        bool ordered = table[i - 1].a < table[i].a ||
                       (table[i - 1].a == table[i].a &&
                        table[i - 1].s < table[i].s);
        CHECK(ordered);
    }

    // a term of the wrong parity cannot be addressed by the rank-2 grid
    FormalSeries off = moved;
    off.set_term(ExponentKey{0, {1}}, CycNumber(1));
    CHECK_THROWS_AS(blowup_cells(off, input.rank), UsageError);
}

TEST_CASE("normalized inputs reappear in the central column") {
    Grade order{Rational(5)};
    ExponentLattice lat = blowup_lattice();
    FormalSeries bare = q_poly({{0, 1}, {1, 2}, {3, 5}});

    SurfaceDTSeries input;
    input.rank = 1;
    input.series =
        FormalSeries::mul(eta_series(lat, order), bare, Grade::infinity());
    FormalSeries moved = blowup_transform(input, order);

    // the eta factors cancel; the a = 0 column of the rank-1 grid holds the
    // bare coefficients at s = k + 1/24
    for (long long k = 0; k <= 3; ++k) {
        Rational s = Rational(k) + Rational(1, 24);
        CycNumber expected = bare.coefficient(lat.q_key(Rational(k)));
        CHECK(blowup_cell(moved, 1, 0, s) == expected);
    }
}

TEST_CASE("rank-two slice collapses to the one-variable theta quotient") {
    CheckResult report = rank2_theta_quotient_check(Grade(Rational(6)));
    INFO(report.detail);
    CHECK(report.ok);
    CHECK(report.detail.find("a=0") != std::string::npos);
    CHECK(report.detail.find("a=1") != std::string::npos);

    // frozen spot checks of the two slices of theta^2:
    //   t^1-slice  = q^{1/4} (1 + 2q + 2q^4 + ...)
    //   t^2-slice  = q ( 2 q^{1/4} + 2 q^{9/4} + ... )
    ExponentLattice lat = blowup_lattice();
    ThetaArgument arg;
    arg.direction = {lat.t_denominator()};
    arg.scale = 1;
    FormalSeries theta = theta_sum(lat, 1, 0, arg, Grade(Rational(6)));
    FormalSeries squared =
        FormalSeries::mul(theta, theta, Grade(Rational(6)));
    CHECK(coeff_at(squared, 6, 2) == CycNumber(1));
    CHECK(coeff_at(squared, 30, 2) == CycNumber(2));
    CHECK(coeff_at(squared, 102, 2) == CycNumber(2));
    CHECK(coeff_at(squared, 30, 4) == CycNumber(2));
    CHECK(coeff_at(squared, 78, 4) == CycNumber(2));

    CHECK_THROWS_AS(rank2_theta_quotient_check(Grade::infinity()), UsageError);
}
