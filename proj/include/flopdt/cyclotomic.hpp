#pragma once

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <string>
#include <vector>

#include "flopdt/errors.hpp"
#include "flopdt/rational.hpp"

namespace flopdt {

/// Orders above this cap are refused with a CapacityError. The cap exists to
/// catch runaway order growth from repeated mixed-order arithmetic; it can be
/// raised by the caller (the command line tool wires it to FLOPDT_CYC_CAP).
inline unsigned& cyclotomic_order_cap() {
    static unsigned cap = 360;
    return cap;
}

inline unsigned euler_phi(unsigned n) {
    unsigned result = n;
    for (unsigned p = 2; p * p <= n; ++p) {
        if (n % p == 0) {
            while (n % p == 0) n /= p;
            result -= result / p;
        }
    }
    if (n > 1) result -= result / n;
    return result;
}

namespace detail {

using Poly = std::vector<Rational>; // little endian, trailing zeros trimmed

inline void poly_trim(Poly& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

inline Poly poly_mul(const Poly& a, const Poly& b) {
    if (a.empty() || b.empty()) return {};
    Poly out(a.size() + b.size() - 1, Rational(0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (b[j] == 0) continue;
            out[i + j] += a[i] * b[j];
        }
    }
    poly_trim(out);
    return out;
}

/// In-place remainder of a modulo the monic polynomial m.
inline void poly_mod(Poly& a, const Poly& m) {
    const std::size_t deg_m = m.size() - 1;
    while (a.size() > deg_m) {
        Rational lead = a.back();
        std::size_t shift = a.size() - 1 - deg_m;
        if (lead != 0) {
            for (std::size_t i = 0; i < deg_m; ++i)
                a[shift + i] -= lead * m[i];
        }
        a.pop_back();
        poly_trim(a);
        if (a.size() <= deg_m) break;
    }
    poly_trim(a);
}

/// Quotient and remainder by a monic divisor.
inline std::pair<Poly, Poly> poly_divmod(Poly a, const Poly& m) {
    const std::size_t deg_m = m.size() - 1;
    Poly q;
    if (a.size() > deg_m) q.assign(a.size() - deg_m, Rational(0));
    while (a.size() > deg_m) {
        Rational lead = a.back();
        std::size_t shift = a.size() - 1 - deg_m;
        q[shift] = lead;
        for (std::size_t i = 0; i < deg_m; ++i)
            a[shift + i] -= lead * m[i];
        a.pop_back();
        poly_trim(a);
    }
    poly_trim(q);
    poly_trim(a);
    return {q, a};
}

inline Poly poly_sub(Poly a, const Poly& b) {
    if (a.size() < b.size()) a.resize(b.size(), Rational(0));
    for (std::size_t i = 0; i < b.size(); ++i) a[i] -= b[i];
    poly_trim(a);
    return a;
}

/// The M-th cyclotomic polynomial, computed bottom-up over the divisors of M
/// by dividing x^d - 1 by the cyclotomic polynomials of the proper divisors.
/// Cached per order; every divisor of a cached order is cached as well.
inline const Poly& cyclotomic_polynomial(unsigned order) {
    static std::map<unsigned, Poly> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto found = cache.find(order);
    if (found != cache.end()) return found->second;
    for (unsigned d = 1; d <= order; ++d) {
        if (order % d != 0 || cache.count(d)) continue;
        Poly value;
        if (d == 1) {
            value = {Rational(-1), Rational(1)}; // x - 1
        } else {
            Poly num(d + 1, Rational(0)); // x^d - 1
            num[0] = -1;
            num[d] = 1;
            Poly den = {Rational(1)};
            for (unsigned j = 1; j < d; ++j)
                if (d % j == 0) den = poly_mul(den, cache.at(j));
            auto [q, r] = poly_divmod(num, den);
            (void)r;
            value = std::move(q);
        }
        cache.emplace(d, std::move(value));
    }
    return cache.at(order);
}

/// Extended Euclid in Q[x]: returns (g, u) with u*a = g modulo m and g the
/// gcd of a and m. Used for inversion in Q[x]/(Phi_M).
inline std::pair<Poly, Poly> poly_half_ext_gcd(Poly a, Poly m) {
    Poly u0 = {Rational(1)}, u1 = {};
    Poly r0 = std::move(a), r1 = std::move(m);
    while (!r1.empty()) {
        // make the divisor monic so poly_divmod applies
        Rational lead = r1.back();
        Poly r1m = r1;
        for (auto& c : r1m) c /= lead;
        auto [q, r] = poly_divmod(r0, r1m);
        for (auto& c : q) c /= lead;
        Poly u2 = poly_sub(u0, poly_mul(q, u1));
        r0 = std::move(r1);
        r1 = std::move(r);
        u0 = std::move(u1);
        u1 = std::move(u2);
    }
    return {r0, u0};
}

} // namespace detail

/// An element of the cyclotomic field Q(zeta_M), stored as coordinates over
/// the power basis 1, zeta, ..., zeta^{phi(M)-1} with zeta = e^{2 pi i / M}.
///
/// Each value carries its own order M. Binary operations on mixed orders
/// embed both operands into Q(zeta_lcm) first. A value whose non-leading
/// coordinates vanish is collapsed to order 1, so plain rationals always
/// take the cheap scalar path and the representation of a rational value is
/// canonical regardless of how it was produced.
class CycNumber {
public:
    CycNumber() : order_(1), coords_{Rational(0)} {}
    CycNumber(const Rational& r) : order_(1), coords_{r} {}
    CycNumber(long long n) : order_(1), coords_{Rational(n)} {}

    /// Builds a value from power basis coordinates (length at most phi(order),
    /// shorter vectors are zero-padded).
    static CycNumber make(unsigned order, std::vector<Rational> coords) {
        check_order(order);
        unsigned phi = euler_phi(order);
        if (coords.size() > phi)
            throw UsageError("coordinate vector longer than phi(order)");
        coords.resize(phi, Rational(0));
        CycNumber x;
        x.order_ = order;
        x.coords_ = std::move(coords);
        x.normalize();
        return x;
    }

    /// zeta_order^power as an exact value.
    static CycNumber root_of_unity(unsigned order, long long power) {
        check_order(order);
        long long p = power % static_cast<long long>(order);
        if (p < 0) p += order;
        detail::Poly mono(static_cast<std::size_t>(p) + 1, Rational(0));
        mono.back() = 1;
        detail::poly_mod(mono, detail::cyclotomic_polynomial(order));
        return from_poly(order, std::move(mono));
    }

    /// e^{i pi r} for rational r, the branch used for half-integral powers of
    /// signs: (-1)^r is defined as this value. Twists compose additively in r.
    static CycNumber half_turn(const Rational& r) {
        Rational turns = r / 2; // e^{2 pi i * turns}
        BigInt den = denominator(turns);
        BigInt num = numerator(turns) % den;
        if (num < 0) num += den;
        if (den > cyclotomic_order_cap())
            throw CapacityError("root of unity order " + den.str() +
                                " exceeds the cyclotomic order cap");
        return root_of_unity(static_cast<unsigned>(den),
                             static_cast<long long>(num));
    }

    static CycNumber i_power(long long k) { return root_of_unity(4, k); }

    unsigned order() const { return order_; }
    const std::vector<Rational>& coords() const { return coords_; }

    bool is_zero() const {
        for (const auto& c : coords_)
            if (c != 0) return false;
        return true;
    }
    bool is_rational() const { return order_ == 1; }
    bool is_one() const { return order_ == 1 && coords_[0] == 1; }

    const Rational& to_rational() const {
        if (order_ != 1)
            throw DomainError("value is not rational");
        return coords_[0];
    }

    /// The same value viewed inside Q(zeta_target); target must be a multiple
    /// of the current order. The result keeps order target with a full
    /// phi(target) coordinate vector even when the value is rational, so two
    /// embedded values can be combined coordinate by coordinate.
    CycNumber embedded(unsigned target) const {
        if (target == order_) return *this;
        check_order(target);
        if (target % order_ != 0)
            throw UsageError("embedding target order must be a multiple");
        unsigned step = target / order_;
        detail::Poly p;
        for (std::size_t i = 0; i < coords_.size(); ++i) {
            if (coords_[i] == 0) continue;
            std::size_t e = i * step;
            if (p.size() <= e) p.resize(e + 1, Rational(0));
            p[e] += coords_[i];
        }
        detail::poly_mod(p, detail::cyclotomic_polynomial(target));
        CycNumber out;
        out.order_ = target;
        p.resize(euler_phi(target), Rational(0));
        out.coords_ = std::move(p);
        return out;
    }

    friend CycNumber operator+(const CycNumber& a, const CycNumber& b) {
        if (a.order_ == 1 && b.order_ == 1)
            return CycNumber(a.coords_[0] + b.coords_[0]);
        unsigned l = common_order(a, b);
        CycNumber ea = a.embedded(l), eb = b.embedded(l);
        for (std::size_t i = 0; i < ea.coords_.size(); ++i)
            ea.coords_[i] += eb.coords_[i];
        ea.normalize();
        return ea;
    }

    friend CycNumber operator-(const CycNumber& a) {
        CycNumber out = a;
        for (auto& c : out.coords_) c = -c;
        return out;
    }
    friend CycNumber operator-(const CycNumber& a, const CycNumber& b) {
        return a + (-b);
    }

    friend CycNumber operator*(const CycNumber& a, const CycNumber& b) {
        if (a.order_ == 1 && b.order_ == 1)
            return CycNumber(a.coords_[0] * b.coords_[0]);
        if (a.order_ == 1) return b.scaled(a.coords_[0]);
        if (b.order_ == 1) return a.scaled(b.coords_[0]);
        unsigned l = common_order(a, b);
        CycNumber ea = a.embedded(l), eb = b.embedded(l);
        detail::Poly p = detail::poly_mul(ea.coords_, eb.coords_);
        detail::poly_mod(p, detail::cyclotomic_polynomial(l));
        return from_poly(l, std::move(p));
    }

    CycNumber scaled(const Rational& r) const {
        CycNumber out = *this;
        for (auto& c : out.coords_) c *= r;
        out.normalize();
        return out;
    }

    /// Multiplicative inverse via the extended Euclidean algorithm modulo the
    /// cyclotomic polynomial (which is irreducible, so every nonzero value is
    /// a unit).
    CycNumber inverse() const {
        if (is_zero()) throw DomainError("inverse of zero");
        if (order_ == 1) return CycNumber(Rational(1) / coords_[0]);
        detail::Poly a = coords_;
        detail::poly_trim(a);
        auto [g, u] = detail::poly_half_ext_gcd(
            a, detail::cyclotomic_polynomial(order_));
        if (g.size() != 1)
            throw DomainError("inverse failed: gcd with the cyclotomic "
                              "polynomial is not constant");
        for (auto& c : u) c /= g[0];
        detail::poly_mod(u, detail::cyclotomic_polynomial(order_));
        return from_poly(order_, std::move(u));
    }

    friend bool operator==(const CycNumber& a, const CycNumber& b) {
        if (a.order_ == b.order_) return a.coords_ == b.coords_;
        unsigned l = common_order(a, b);
        return a.embedded(l).coords_ == b.embedded(l).coords_;
    }
    friend bool operator!=(const CycNumber& a, const CycNumber& b) {
        return !(a == b);
    }

    std::string str() const {
        if (order_ == 1) return format_rational(coords_[0]);
        std::string s = "cyc" + std::to_string(order_) + "[";
        for (std::size_t i = 0; i < coords_.size(); ++i) {
            if (i) s += ",";
            s += format_rational(coords_[i]);
        }
        return s + "]";
    }

private:
    static void check_order(unsigned order) {
        if (order == 0) throw UsageError("cyclotomic order must be positive");
        if (order > cyclotomic_order_cap())
            throw CapacityError("cyclotomic order " + std::to_string(order) +
                                " exceeds the cap " +
                                std::to_string(cyclotomic_order_cap()));
    }

    static unsigned common_order(const CycNumber& a, const CycNumber& b) {
        unsigned l = std::lcm(a.order_, b.order_);
        check_order(l);
        return l;
    }

    static CycNumber from_poly(unsigned order, detail::Poly p) {
        CycNumber x;
        x.order_ = order;
        p.resize(euler_phi(order), Rational(0));
        x.coords_ = std::move(p);
        x.normalize();
        return x;
    }

    void normalize() {
        if (order_ == 1) return;
        for (std::size_t i = 1; i < coords_.size(); ++i)
            if (coords_[i] != 0) return;
        Rational c0 = coords_.empty() ? Rational(0) : coords_[0];
        order_ = 1;
        coords_ = {c0};
    }

    unsigned order_;
    std::vector<Rational> coords_;
};

// Integer power by repeated squaring; negative exponents go through inverse().
inline CycNumber cyc_pow(const CycNumber& base, long long exponent) {
    if (exponent == 0) return CycNumber(Rational(1));
    CycNumber b = exponent < 0 ? base.inverse() : base;
    unsigned long long e = exponent < 0
        ? static_cast<unsigned long long>(-(exponent + 1)) + 1ull
        : static_cast<unsigned long long>(exponent);
    CycNumber acc(Rational(1));
    while (e > 0) {
        if (e & 1ull) acc = acc * b;
        b = b * b;
        e >>= 1;
    }
    return acc;
}

} // namespace flopdt
