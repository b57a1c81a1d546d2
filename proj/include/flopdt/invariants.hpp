#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "flopdt/check.hpp"
#include "flopdt/errors.hpp"
#include "flopdt/modular.hpp"
#include "flopdt/series.hpp"

namespace flopdt {

/// Numerical data of a contracted irreducible curve: the generic fiber
/// length l, the per-multiplicity counts n_1..n_l, the optional width (the
/// length-one geometry is classified by it), and the intersection numbers
/// with the polarization H and the twisting divisor P.
struct FlopCurveData {
    int l = 1;
    std::vector<long long> multiplicities; // n_1..n_l
    std::optional<long long> width;
    long long h_dot_c = 1;
    long long p_dot_c = 0;

    void validate() const {
        if (l < 1 || l > 6)
            throw UsageError("fiber length l must lie in 1..6");
        if (multiplicities.size() != static_cast<std::size_t>(l))
            throw UsageError("need exactly l multiplicities n_1..n_l");
        for (long long n : multiplicities)
            if (n < 0) throw UsageError("multiplicities must be nonnegative");
        if (h_dot_c < 1)
            throw UsageError("H.C must be a positive integer");
        if (width) {
            if (l != 1)
                throw UsageError("width is defined only for length one");
            if (*width < 1) throw UsageError("width must be positive");
            if (*width != multiplicities[0])
                throw UsageError("width must equal n_1");
        }
    }

    /// n_j with the convention n_j = 0 beyond the stored range.
    long long multiplicity(long long j) const {
        if (j < 1 || j > l) return 0;
        return multiplicities[static_cast<std::size_t>(j - 1)];
    }
};

/// The grading used for stand-alone curve-counting series: q carries weight
/// 1 and the curve class direction carries weight +1/2, so every factor
/// q^n t^{mC} that occurs in the effective-cone products is positively
/// graded.
inline ExponentLattice curve_counting_lattice() {
    return ExponentLattice(1, 24, 2, Rational(1), {Rational(1, 2)});
}

/// The degree-(n, m C) count of one-dimensional sheaf classes, through the
/// divisor sum sum_{k >= 1, k | (n, m)} n_{m/k} / k^2. Every k divides
/// n = 0, which keeps the sum finite because k still has to divide m.
inline Rational n_invariant(long long n, long long m,
                            const FlopCurveData& data) {
    data.validate();
    if (m < 1) throw UsageError("the curve degree m must be positive");
    Rational total(0);
    for (long long k = 1; k <= m; ++k) {
        if (m % k != 0) continue;
        if (n != 0 && n % k != 0) continue;
        total += Rational(data.multiplicity(m / k), k * k);
    }
    return total;
}

namespace detail {

/// Enumerates the slope-mu slice: pairs (j, n) with n = mu * j * (H.C),
/// n a positive integer for mu > 0 and n = 0 for mu = 0. Calls fn(j, n).
template <typename F>
void for_each_slice_factor(const FlopCurveData& data, const Rational& mu,
                           F&& fn) {
    if (mu < 0) return;
    for (long long j = 1; j <= data.l; ++j) {
        Rational n_exact = mu * j * data.h_dot_c;
        if (denominator(n_exact) != 1) continue;
        long long n = static_cast<long long>(numerator(n_exact));
        if (mu == 0 ? n != 0 : n < 1) continue;
        fn(j, n);
    }
}

} // namespace detail

/// The slope-mu slice of the parabolic pair series in the weighted count:
///   prod_{1<=j<=l, n = mu j (H.C)} (1 - (-1)^{j H.C} q^n t^{jC})^{j n_j (H.C)}
/// An exact polynomial; slices with no integer solutions give 1.
inline FormalSeries par_series_behrend(
    const FlopCurveData& data, const Rational& mu, const Grade& valid_to,
    const ExponentLattice& lattice = curve_counting_lattice()) {
    data.validate();
    FormalSeries out = FormalSeries::one(lattice, valid_to);
    detail::for_each_slice_factor(data, mu, [&](long long j, long long n) {
        long long count = j * data.multiplicity(j) * data.h_dot_c;
        if (count == 0) return;
        ExponentKey key = lattice.key(Rational(n), {Rational(j)});
        CycNumber coeff((j * data.h_dot_c) % 2 == 0 ? Rational(-1)
                                                    : Rational(1));
        out = FormalSeries::mul(
            out, pow_one_plus_monomial(lattice, coeff, key, count, valid_to),
            valid_to);
    });
    return out;
}

/// The slope-mu slice of the parabolic pair series in the plain count for a
/// width-n length-one curve: f_n(q^mu t^C) when mu is an integer, else 1.
inline FormalSeries par_series_euler(
    long long width, const Rational& mu, const Grade& valid_to,
    const ExponentLattice& lattice = curve_counting_lattice()) {
    if (width < 1) throw UsageError("width must be positive");
    if (denominator(mu) != 1)
        return FormalSeries::one(lattice, valid_to);
    ExponentKey x = lattice.key(mu, {Rational(1)});
    return fn_poly(lattice, width, x).truncated(valid_to);
}

/// Verifies that the slope-mu pair polynomial exponentiates the divisor-sum
/// counts:
///   par slice = prod exp(N_{n,m} q^n t^{mC})^{(-1)^{m H.C - 1} m H.C}
/// with the product over the same slope slice, expanded to the bound.
inline CheckResult check_par_equals_n(
    const FlopCurveData& data, const Rational& mu, const Grade& valid_to,
    const ExponentLattice& lattice = curve_counting_lattice()) {
    data.validate();
    if (!valid_to.is_finite())
        throw UsageError("the comparison needs a finite bound");
    FormalSeries lhs = par_series_behrend(data, mu, valid_to, lattice);

    FormalSeries rhs = FormalSeries::one(lattice, valid_to);
    // the slice over all degrees m: n = mu * m * (H.C) must be an integer
    // (n >= 1 for mu > 0, n = 0 for mu = 0); the factor grade n w_q + m w_C
    // grows with m, which bounds the enumeration
    if (mu < 0) return compare_series(lhs, rhs);
    for (long long m = 1;; ++m) {
        ExponentKey probe = lattice.key(Rational(0), {Rational(m)});
        Rational t_grade = lattice.grade(probe);
        Rational n_exact = mu * Rational(m) * data.h_dot_c;
        if (mu == 0) {
            if (!(Grade(t_grade) <= valid_to)) break;
        } else {
            Rational full = lattice.weight_q() * n_exact + t_grade;
            if (!(Grade(full) <= valid_to)) break;
            if (denominator(n_exact) != 1) continue;
        }
        long long n =
            mu == 0 ? 0 : static_cast<long long>(numerator(n_exact));
        if (mu > 0 && n < 1) continue;
        Rational count = n_invariant(n, m, data);
        if (count == 0) continue;
        ExponentKey key = lattice.key(Rational(n), {Rational(m)});
        FormalSeries arg = FormalSeries::monomial(lattice, key,
                                                  CycNumber(count), valid_to);
        long long hb = m * data.h_dot_c;
        long long bracket = hb % 2 == 0 ? -hb : hb;
        FormalSeries factor =
            series_int_pow(series_exp(arg, valid_to), bracket, valid_to);
        rhs = FormalSeries::mul(rhs, factor, valid_to);
    }
    return compare_series(lhs, rhs);
}

} // namespace flopdt
