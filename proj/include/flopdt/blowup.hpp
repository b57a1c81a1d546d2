#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "flopdt/check.hpp"
#include "flopdt/modular.hpp"
#include "flopdt/series.hpp"

namespace flopdt {

/// Exponent lattice for surface-side series: rank one, graded by the
/// q-exponent alone (the exceptional direction carries no weight), with
/// denominators large enough to hold eta shifts and half-integral theta
/// exponents.
inline ExponentLattice blowup_lattice() {
    return ExponentLattice(1, 24, 2, Rational(1), {Rational(0)});
}

/// One-variable counting series attached to a fixed sheaf rank on a surface;
/// the exceptional variable of the ambient lattice stays unused until the
/// transform introduces it.
struct SurfaceDTSeries {
    long long rank = 1;
    FormalSeries series = FormalSeries::one(blowup_lattice());
    std::string divisor_label;

    void validate() const {
        if (rank < 1)
            throw UsageError("surface series rank must be a positive integer");
        if (!(series.lattice() == blowup_lattice()))
            throw UsageError("surface series must live on the blow-up lattice");
        for (const auto& [k, c] : series.terms()) {
            (void)c;
            if (k.t_num[0] != 0)
                throw UsageError(
                    "surface series must not involve the exceptional variable");
        }
    }
};

/// Multiplier picked up by a rank-r series under a point blow-up:
/// (eta^{-1} theta_{1,0})^r. Entire in the exceptional variable, with
/// finitely many t-exponents at each grade; t-support is integral for even
/// r and half-integral for odd r.
inline FormalSeries blowup_error(long long r, const Grade& order) {
    if (r < 0) throw UsageError("blow-up multiplier needs a rank >= 0");
    if (!order.is_finite())
        throw UsageError("blow-up multiplier needs a finite validity bound");
    ExponentLattice lat = blowup_lattice();
    if (r == 0) return FormalSeries::one(lat).truncated(order);

    ThetaArgument arg;
    arg.direction = {lat.t_denominator()};
    arg.scale = 1;
    // pad by the eta tail so the product is exact on the requested ball
    Grade inner = Grade(order.value() + lat.weight_q() / 24);
    FormalSeries base =
        FormalSeries::mul(eta_inverse_series(lat, inner),
                          theta_sum(lat, 1, 0, arg, inner), Grade::infinity());
    FormalSeries out = series_int_pow(base, r, order);
    if (out.valid_to() < order)
        throw PrecisionError("blow-up multiplier lost validity while assembling");
    return out.truncated(order);
}

/// Right-hand side of the point blow-up formula: the input series times the
/// rank-r multiplier. The blown-up invariants are read back off the exponent
/// grid with blowup_cell / blowup_cells.
inline FormalSeries blowup_transform(const SurfaceDTSeries& input,
                                     const Grade& order) {
    input.validate();
    if (!(order <= input.series.valid_to()))
        throw PrecisionError(
            "input series validity is below the requested order");
    // pad the multiplier when the input reaches below grade zero, so the
    // product stays exact on the requested ball
    Grade mult_order = order;
    if (!input.series.is_zero()) {
        Grade emin = input.series.effective_min_grade();
        if (emin < Grade(Rational(0)))
            mult_order = Grade(order.value() - emin.value());
    }
    FormalSeries mult = blowup_error(input.rank, mult_order);
    return FormalSeries::mul(input.series, mult, Grade::infinity());
}

/// Exponent-grid address of one blown-up invariant: the coefficient of
/// q^{r/12 + a/2 + s} t^{a + r/2}, where a counts exceptional-curve
/// multiples and s runs over the input grading. Off-grid addresses are
/// rejected; addresses beyond the computed validity raise PrecisionError.
inline CycNumber blowup_cell(const FormalSeries& transformed, long long r,
                             long long a, const Rational& s) {
    const ExponentLattice& lat = transformed.lattice();
    if (lat.rank() != 1)
        throw UsageError("cell read-off expects a rank-one lattice");
    Rational q_exp = Rational(r, 12) + Rational(a, 2) + s;
    Rational t_exp = Rational(a) + Rational(r, 2);
    return transformed.coefficient(lat.key(q_exp, {t_exp}));
}

/// One row of the read-off table.
struct BlowupCell {
    long long a = 0;
    Rational s = Rational(0);
    CycNumber value;
};

/// Collects every term of a transformed series into its (a, s) cell and
/// returns the table sorted by (a, s). A term whose exceptional exponent has
/// the wrong parity cannot come from a rank-r transform and is reported as a
/// usage error rather than dropped.
inline std::vector<BlowupCell> blowup_cells(const FormalSeries& transformed,
                                            long long r) {
    const ExponentLattice& lat = transformed.lattice();
    if (lat.rank() != 1)
        throw UsageError("cell read-off expects a rank-one lattice");
    std::vector<BlowupCell> table;
    for (const auto& [k, c] : transformed.terms()) {
        std::int64_t spread = k.t_num[0] - r;
        if (spread % 2 != 0)
            throw UsageError("term at " + k.str() +
                             " misses the rank-" + std::to_string(r) +
                             " read-off grid");
        long long a = spread / 2;
        Rational s = Rational(k.q_num, lat.q_denominator()) - Rational(r, 12) -
                     Rational(a, 2);
        table.push_back(BlowupCell{a, s, c});
    }
    std::sort(table.begin(), table.end(),
              [](const BlowupCell& x, const BlowupCell& y) {
                  if (x.a != y.a) return x.a < y.a;
                  return x.s < y.s;
              });
    return table;
}

namespace detail {

/// Coefficient series of one power of the exceptional variable, re-keyed
/// with that power removed. Validity is inherited: the grading ignores the
/// exceptional direction, so every ball membership is unchanged.
inline FormalSeries t_slice(const FormalSeries& f, std::int64_t t_num) {
    FormalSeries out = FormalSeries::zero(f.lattice(), f.valid_to());
    for (const auto& [k, c] : f.terms()) {
        if (k.t_num[0] != t_num) continue;
        ExponentKey flat = k;
        flat.t_num[0] = 0;
        out.set_term(flat, c);
    }
    return out;
}

} // namespace detail

/// Rank-two specialization of the blow-up multiplier. Verifies, for
/// a in {0, 1}, that the t^{a+1}-coefficient of theta_{1,0}(q,t)^2 equals
/// q^{(a+1)^2/4} theta_a(q), and that after folding in eta^{-2} the same
/// slice is the regraded one-variable error factor q^{1/12} theta_a / eta^2
/// shifted by q^{r/12 + a/2 + a^2/4} with r = 2. Disagreement is a report
/// outcome, not an exception.
inline CheckResult rank2_theta_quotient_check(const Grade& order) {
    if (!order.is_finite())
        throw UsageError("quotient check needs a finite validity bound");
    ExponentLattice lat = blowup_lattice();
    Grade wide = Grade(order.value() + Rational(1));

    ThetaArgument arg;
    arg.direction = {lat.t_denominator()};
    arg.scale = 1;
    FormalSeries theta2 =
        FormalSeries::mul(theta_sum(lat, 1, 0, arg, wide),
                          theta_sum(lat, 1, 0, arg, wide), wide);
    FormalSeries eta_inv2 =
        FormalSeries::mul(eta_inverse_series(lat, wide),
                          eta_inverse_series(lat, wide), Grade::infinity());
    FormalSeries dressed = FormalSeries::mul(theta2, eta_inv2, Grade::infinity());

    std::string detail_text;
    for (long long a : {0LL, 1LL}) {
        std::int64_t slice_t = lat.t_denominator() * (a + 1);
        Rational square_shift = Rational((a + 1) * (a + 1), 4);

        FormalSeries bare_slice =
            detail::t_slice(theta2, slice_t).truncated(order);
        FormalSeries bare_expected = FormalSeries::mul(
            theta_a_series(lat, a, order),
            FormalSeries::monomial(lat, lat.q_key(square_shift), CycNumber(1)),
            Grade::infinity());
        CheckResult bare = compare_series(bare_slice, bare_expected);

        // the same identity after regrading: cell shift q^{r/12 + a/2 + a^2/4}
        // times the reported error factor q^{1/12} theta_a / eta^2
        Rational cell_shift = Rational(2, 12) + Rational(a, 2) + Rational(a * a, 4);
        Rational error_shift = Rational(1, 12);
        FormalSeries dressed_slice =
            detail::t_slice(dressed, slice_t).truncated(order);
        FormalSeries error_factor = FormalSeries::mul(
            FormalSeries::mul(theta_a_series(lat, a, order), eta_inv2,
                              Grade::infinity()),
            FormalSeries::monomial(lat, lat.q_key(error_shift), CycNumber(1)),
            Grade::infinity());
        FormalSeries dressed_expected = FormalSeries::mul(
            error_factor,
            FormalSeries::monomial(lat, lat.q_key(cell_shift), CycNumber(1)),
            Grade::infinity());
        CheckResult folded = compare_series(dressed_slice, dressed_expected);

        if (!detail_text.empty()) detail_text += "; ";
        detail_text += "a=" + std::to_string(a) + " slice " +
                       (bare.ok ? "ok" : bare.detail) + ", regraded factor " +
                       (folded.ok ? "ok" : folded.detail);
        if (!bare.ok || !folded.ok)
            return CheckResult{false, detail_text};
    }
    return CheckResult{true, detail_text + " (to grade " + order.str() + ")"};
}

} // namespace flopdt
