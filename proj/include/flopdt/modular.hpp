#pragma once

#include <cstdint>
#include <vector>

#include "flopdt/errors.hpp"
#include "flopdt/lattice.hpp"
#include "flopdt/rational.hpp"
#include "flopdt/series.hpp"

namespace flopdt {

/// The t-argument of a theta series: e^{i pi twist} * t^(scale * direction),
/// with direction given in t numerator units of the ambient lattice. The
/// twist is measured in half turns, so integer values reproduce the sign
/// (-1)^twist and twists compose additively.
struct ThetaArgument {
    Rational twist = Rational(0);
    std::vector<std::int64_t> direction;
    long long scale = 1;
};

namespace detail {

inline std::vector<std::int64_t> theta_direction(const ThetaArgument& arg,
                                                 unsigned rank) {
    if (arg.direction.size() != rank)
        throw UsageError("theta direction length must equal the lattice rank");
    std::vector<std::int64_t> d(rank);
    for (unsigned i = 0; i < rank; ++i) d[i] = arg.direction[i] * arg.scale;
    return d;
}

} // namespace detail

/// Two-character theta series
///   sum_k q^{q_scale (k + a/2)^2} {e^{i pi (b + twist)} t^dir}^{k + a/2},
/// truncated at valid_to. The grade of the k-th term is a convex quadratic
/// in k, so the support inside the validity ball is a contiguous window
/// found by scanning outward from the vertex; the result is exact on the
/// whole ball.
inline FormalSeries theta_sum(const ExponentLattice& lattice, long long a,
                              long long b, const ThetaArgument& arg,
                              const Grade& valid_to,
                              const Rational& q_scale = Rational(1, 2)) {
    if (!valid_to.is_finite())
        throw UsageError("theta series needs a finite validity bound");
    if (q_scale <= 0)
        throw ChamberError("theta grading is unbounded below unless the q scale is positive");
    unsigned rank = lattice.rank();
    std::vector<std::int64_t> d = detail::theta_direction(arg, rank);

    // grade of the term with index u = 2k + a is A u^2 + B u
    Rational A = lattice.weight_q() * q_scale / 4;
    Rational B(0);
    for (unsigned i = 0; i < rank; ++i)
        B += lattice.weight_t()[i] * Rational(d[i], 2 * lattice.t_denominator());

    Rational twist = Rational(b) + arg.twist;
    FormalSeries out = FormalSeries::zero(lattice, valid_to);
    auto emit = [&](long long k) -> bool {
        Rational u(2 * k + a);
        Rational grade = A * u * u + B * u;
        if (!(Grade(grade) <= valid_to)) return false;
        Rational q_exp = q_scale * u * u / 4;
        std::vector<Rational> t_exp(rank);
        for (unsigned i = 0; i < rank; ++i)
            t_exp[i] = u * Rational(d[i], 2 * lattice.t_denominator());
        ExponentKey key = lattice.key(q_exp, t_exp);
        CycNumber coeff = CycNumber::half_turn(twist * u / 2);
        out.set_term(key, out.coefficient(key) + coeff);
        return true;
    };

    // vertex of the quadratic in k units
    Rational k_star = (-B / (2 * A) - a) / 2;
    long long k0 = static_cast<long long>(rational_floor(k_star));
    for (long long k = k0; emit(k); --k) {}
    for (long long k = k0 + 1; emit(k); ++k) {}
    return out;
}

/// Same series through the triple product
///   a=1:  i q^{s/4} (W^{1/2} - W^{-1/2})
///           prod_{m>=1} (1 - q^{2sm})(1 - q^{2sm} W)(1 - q^{2sm} W^{-1})
///   a=0:  prod_{m>=1} (1 - q^{2sm})(1 + q^{s(2m-1)} W)(1 + q^{s(2m-1)} W^{-1})
/// with s = q_scale and W the twisted t-argument folded with b. Serves as an
/// independent cross-check for theta_sum.
inline FormalSeries theta_product(const ExponentLattice& lattice, long long a,
                                  long long b, const ThetaArgument& arg,
                                  const Grade& valid_to,
                                  const Rational& q_scale = Rational(1, 2)) {
    if (!valid_to.is_finite())
        throw UsageError("theta series needs a finite validity bound");
    if (q_scale <= 0)
        throw ChamberError("theta grading is unbounded below unless the q scale is positive");
    if (a != 0 && a != 1)
        throw UsageError("theta product form is implemented for a in {0, 1}");
    unsigned rank = lattice.rank();
    std::vector<std::int64_t> d = detail::theta_direction(arg, rank);

    // total half-turn twist mu on W, normalized so that the series matches
    // theta_sum(a, b, arg): for a=1 one unit of twist is already spent on
    // the alternating sign of the sum
    Rational mu = Rational(b) + arg.twist - (a == 1 ? 1 : 0);

    auto t_power = [&](const Rational& q_exp, int sign, int half) {
        // key of q^{q_exp} W^{+-1} or W^{+-1/2}
        std::vector<Rational> t_exp(rank);
        for (unsigned i = 0; i < rank; ++i)
            t_exp[i] = Rational(sign * d[i], half ? 2 : 1) /
                       lattice.t_denominator();
        return lattice.key(q_exp, t_exp);
    };
    Rational lambda_d(0);
    for (unsigned i = 0; i < rank; ++i)
        lambda_d += lattice.weight_t()[i] * Rational(d[i], lattice.t_denominator());

    // slack budget: every multiplication by a factor whose varying term has
    // negative grade costs exactly that much validity, and only finitely
    // many factors do
    Rational slack(0);
    if (a == 1) {
        Rational front_min = q_scale / 4 - abs(lambda_d) / 2;
        if (front_min < 0) slack -= front_min;
    }
    for (long long m = 1;; ++m) {
        Rational q_exp = a == 1 ? Rational(q_scale * 2 * m)
                                : Rational(q_scale * (2 * m - 1));
        Rational worst = lattice.weight_q() * q_exp - abs(lambda_d);
        if (worst >= 0) break;
        slack -= 2 * worst; // both W and W^{-1} factors may dip below zero
    }
    Grade work = Grade(valid_to.value() + slack);

    FormalSeries acc = FormalSeries::one(lattice, work);
    if (a == 1) {
        FormalSeries front = FormalSeries::zero(lattice);
        ExponentKey up_key = t_power(q_scale / 4, +1, 1);
        ExponentKey down_key = t_power(q_scale / 4, -1, 1);
        // accumulate: a zero direction folds both onto one key
        front.set_term(up_key, front.coefficient(up_key) +
                                   CycNumber::i_power(1) *
                                       CycNumber::half_turn(mu / 2));
        front.set_term(down_key, front.coefficient(down_key) -
                                     CycNumber::i_power(1) *
                                         CycNumber::half_turn(-mu / 2));
        acc = FormalSeries::mul(acc, front, work);
    }
    CycNumber w_plus = CycNumber::half_turn(mu);
    CycNumber w_minus = CycNumber::half_turn(-mu);
    for (long long m = 1;; ++m) {
        Rational q_plain = q_scale * 2 * m;
        Rational q_mixed = a == 1 ? q_plain : q_scale * (2 * m - 1);
        Rational cheapest = lattice.weight_q() * q_mixed - abs(lambda_d);
        Rational plain_grade = lattice.weight_q() * q_plain;
        if (plain_grade < cheapest) cheapest = plain_grade;
        // a later factor can still land inside the ball by pairing with the
        // lowest-grade part of the accumulator, so offset the cutoff by it
        Rational floor_acc(0);
        Grade acc_min = acc.min_grade();
        if (acc_min.is_finite() && acc_min.value() < 0)
            floor_acc = acc_min.value();
        if (!(Grade(cheapest + floor_acc) <= acc.valid_to())) break;
        CycNumber sign = a == 1 ? CycNumber(-1) : CycNumber(1);
        FormalSeries plain = FormalSeries::one(lattice);
        plain.set_term(lattice.q_key(q_plain), CycNumber(-1));
        FormalSeries up = FormalSeries::one(lattice);
        up.set_term(t_power(q_mixed, +1, 0), sign * w_plus);
        FormalSeries down = FormalSeries::one(lattice);
        down.set_term(t_power(q_mixed, -1, 0), sign * w_minus);
        acc = FormalSeries::mul(acc, plain, work);
        acc = FormalSeries::mul(acc, up, work);
        acc = FormalSeries::mul(acc, down, work);
    }
    if (acc.valid_to() < valid_to)
        throw PrecisionError("theta product lost more validity than budgeted");
    return acc.truncated(valid_to);
}

/// q^{1/24} prod_{k>=1} (1 - q^k); exact on the whole requested ball.
inline FormalSeries eta_series(const ExponentLattice& lattice,
                               const Grade& valid_to) {
    if (!valid_to.is_finite())
        throw UsageError("eta needs a finite validity bound");
    auto counter = std::make_shared<long long>(0);
    const ExponentLattice lat = lattice;
    FormalSeries product = series_product_stream(
        lattice, valid_to, [counter, lat]() -> std::optional<ProductFactor> {
            ++*counter;
            FormalSeries f = FormalSeries::one(lat);
            f.set_term(lat.q_key(Rational(*counter)), CycNumber(-1));
            return ProductFactor{f, 1};
        });
    FormalSeries shift =
        FormalSeries::monomial(lattice, lattice.q_key(Rational(1, 24)),
                               CycNumber(1));
    return shift * product;
}

/// q^{-1/24} prod_{k>=1} (1 - q^k)^{-1}, built directly so the result is
/// exact on the whole requested ball rather than paying an inversion
/// penalty.
inline FormalSeries eta_inverse_series(const ExponentLattice& lattice,
                                       const Grade& valid_to) {
    if (!valid_to.is_finite())
        throw UsageError("eta needs a finite validity bound");
    Grade inner = Grade(valid_to.value() + lattice.weight_q() / 24);
    auto counter = std::make_shared<long long>(0);
    const ExponentLattice lat = lattice;
    FormalSeries product = series_product_stream(
        lattice, inner, [counter, lat]() -> std::optional<ProductFactor> {
            ++*counter;
            FormalSeries f = FormalSeries::one(lat);
            f.set_term(lat.q_key(Rational(*counter)), CycNumber(-1));
            return ProductFactor{f, -1};
        });
    FormalSeries shift =
        FormalSeries::monomial(lattice, lattice.q_key(Rational(-1, 24)),
                               CycNumber(1));
    return shift * product;
}

/// The geometric polynomial 1 + x + ... + x^n evaluated at the monomial x;
/// exact.
inline FormalSeries fn_poly(const ExponentLattice& lattice, long long n,
                            const ExponentKey& x) {
    if (n < 0) throw UsageError("fn_poly needs n >= 0");
    if (x.t_num.size() != lattice.rank())
        throw UsageError("monomial rank must equal the lattice rank");
    FormalSeries out = FormalSeries::zero(lattice);
    ExponentKey k = lattice.zero_key();
    for (long long i = 0; i <= n; ++i) {
        out.set_term(k, out.coefficient(k) + CycNumber(1));
        k += x;
    }
    return out;
}

/// The same polynomial built as prod_{j=1}^{n} (1 - zeta^j x) for zeta a
/// primitive (n+1)-th root of unity; every coefficient collapses back to a
/// plain integer, which makes this a useful independent construction. The
/// result carries the requested validity bound.
inline FormalSeries fn_cyclotomic_product(const ExponentLattice& lattice,
                                          long long n, const ExponentKey& x,
                                          const Grade& valid_to) {
    if (n < 0) throw UsageError("fn_cyclotomic_product needs n >= 0");
    if (x.t_num.size() != lattice.rank())
        throw UsageError("monomial rank must equal the lattice rank");
    FormalSeries acc = FormalSeries::one(lattice);
    unsigned order = static_cast<unsigned>(n) + 1;
    for (long long j = 1; j <= n; ++j) {
        FormalSeries factor = FormalSeries::one(lattice);
        factor.set_term(x, -CycNumber::root_of_unity(order, j));
        acc = acc * factor;
    }
    return acc.truncated(valid_to);
}

/// One-variable theta sum_k q^{(k + a/2)^2} as a series with no t content.
inline FormalSeries theta_a_series(const ExponentLattice& lattice, long long a,
                                   const Grade& valid_to) {
    ThetaArgument arg;
    arg.direction.assign(lattice.rank(), 0);
    return theta_sum(lattice, a, 0, arg, valid_to, Rational(1));
}

} // namespace flopdt
