#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "flopdt/cyclotomic.hpp"
#include "flopdt/errors.hpp"
#include "flopdt/lattice.hpp"
#include "flopdt/rational.hpp"

namespace flopdt {

/// A truncated formal series over an exponent lattice, with cyclotomic
/// coefficients and an explicit validity bound.
///
/// The contract maintained by every operation: all exponents e with
/// lambda(e) <= valid_to carry their exact coefficient (absent keys are
/// exactly zero there); nothing is claimed beyond valid_to. Stored keys
/// always satisfy lambda(key) <= valid_to. Values are immutable after
/// construction apart from the explicit set_term builder; all operations
/// are pure.
class FormalSeries {
public:
    using TermMap = std::map<ExponentKey, CycNumber>;

    static FormalSeries zero(const ExponentLattice& lattice,
                             Grade valid_to = Grade::infinity()) {
        return FormalSeries(lattice, std::move(valid_to));
    }

    static FormalSeries one(const ExponentLattice& lattice,
                            Grade valid_to = Grade::infinity()) {
        FormalSeries s(lattice, std::move(valid_to));
        s.set_term(lattice.zero_key(), CycNumber(1));
        return s;
    }

    static FormalSeries monomial(const ExponentLattice& lattice,
                                 const ExponentKey& key, const CycNumber& coeff,
                                 Grade valid_to = Grade::infinity()) {
        FormalSeries s(lattice, std::move(valid_to));
        s.set_term(key, coeff);
        return s;
    }

    const ExponentLattice& lattice() const { return lattice_; }
    const TermMap& terms() const { return terms_; }
    const Grade& valid_to() const { return valid_to_; }
    bool is_zero() const { return terms_.empty(); }

    /// Infimum of lambda over the stored support; +infinity for the zero
    /// series.
    Grade min_grade() const {
        if (terms_.empty()) return Grade::infinity();
        bool first = true;
        Rational best;
        for (const auto& [k, c] : terms_) {
            Rational g = lattice_.grade(k);
            if (first || g < best) {
                best = g;
                first = false;
            }
        }
        return Grade(best);
    }

    /// Lower bound for the grade of any term of the full (untruncated)
    /// series: terms beyond the validity bound are unknown but cannot lie
    /// below it. This is the sound quantity for validity propagation.
    Grade effective_min_grade() const { return min(min_grade(), valid_to_); }

    /// Exact coefficient lookup. Requesting a key beyond the validity bound
    /// raises a PrecisionError; inside the bound absent keys are exactly 0.
    CycNumber coefficient(const ExponentKey& key) const {
        if (valid_to_ < Grade(lattice_.grade(key)))
            throw PrecisionError("coefficient at " + key.str() +
                                 " lies beyond the validity bound " +
                                 valid_to_.str());
        auto it = terms_.find(key);
        return it == terms_.end() ? CycNumber(0) : it->second;
    }

    /// Inserts or replaces one term, silently dropping coefficients that are
    /// zero or lie beyond the validity bound.
    FormalSeries& set_term(const ExponentKey& key, const CycNumber& coeff) {
        if (key.t_num.size() != lattice_.rank())
            throw UsageError("exponent key rank mismatch");
        if (coeff.is_zero() || Grade(lattice_.grade(key)) <= valid_to_) {
            if (coeff.is_zero())
                terms_.erase(key);
            else
                terms_[key] = coeff;
        }
        return *this;
    }

    /// A copy truncated to a smaller validity bound.
    FormalSeries truncated(const Grade& bound) const {
        Grade v = min(valid_to_, bound);
        FormalSeries out(lattice_, v);
        std::int64_t thr = lattice_.grade_threshold(v);
        for (const auto& [k, c] : terms_)
            if (lattice_.grade_scaled(k) <= thr) out.terms_.emplace(k, c);
        return out;
    }

    FormalSeries scaled(const CycNumber& factor) const {
        FormalSeries out(lattice_, valid_to_);
        if (factor.is_zero()) return out;
        for (const auto& [k, c] : terms_) {
            CycNumber v = c * factor;
            if (!v.is_zero()) out.terms_.emplace(k, v);
        }
        return out;
    }

    friend FormalSeries operator-(const FormalSeries& a) {
        return a.scaled(CycNumber(-1));
    }

    friend FormalSeries operator+(const FormalSeries& a, const FormalSeries& b) {
        require_same_lattice(a, b, "add");
        Grade v = min(a.valid_to_, b.valid_to_);
        FormalSeries out(a.lattice_, v);
        std::int64_t thr = a.lattice_.grade_threshold(v);
        for (const auto& [k, c] : a.terms_)
            if (a.lattice_.grade_scaled(k) <= thr) out.terms_.emplace(k, c);
        for (const auto& [k, c] : b.terms_) {
            if (a.lattice_.grade_scaled(k) > thr) continue;
            auto [it, inserted] = out.terms_.emplace(k, c);
            if (!inserted) {
                it->second = it->second + c;
                if (it->second.is_zero()) out.terms_.erase(it);
            }
        }
        return out;
    }

    friend FormalSeries operator-(const FormalSeries& a, const FormalSeries& b) {
        return a + (-b);
    }

    friend FormalSeries operator*(const FormalSeries& a, const FormalSeries& b) {
        return mul(a, b, Grade::infinity());
    }

    /// Product with the validity rule
    ///   valid = min(a.valid + min*(b), b.valid + min*(a), cap)
    /// where min* is the effective minimum grade. Terms are accumulated in a
    /// hash map; exact arithmetic makes the result independent of the
    /// accumulation order.
    static FormalSeries mul(const FormalSeries& a, const FormalSeries& b,
                            const Grade& cap) {
        require_same_lattice(a, b, "multiply");
        Grade v = min(min(a.valid_to_ + b.effective_min_grade(),
                          b.valid_to_ + a.effective_min_grade()),
                      cap);
        FormalSeries out(a.lattice_, v);
        if (a.terms_.empty() || b.terms_.empty()) return out;
        std::int64_t thr = a.lattice_.grade_threshold(v);

        struct Entry {
            const ExponentKey* key;
            const CycNumber* coeff;
            std::int64_t grade;
        };
        auto flatten = [&](const TermMap& terms) {
            std::vector<Entry> entries;
            entries.reserve(terms.size());
            for (const auto& [k, c] : terms)
                entries.push_back({&k, &c, a.lattice_.grade_scaled(k)});
            return entries;
        };
        std::vector<Entry> ea = flatten(a.terms_), eb = flatten(b.terms_);

        std::unordered_map<ExponentKey, CycNumber, ExponentKeyHash> accum;
        accum.reserve(ea.size() + eb.size());
        for (const auto& x : ea) {
            for (const auto& y : eb) {
                if (x.grade + y.grade > thr) continue;
                ExponentKey key = *x.key + *y.key;
                auto [it, inserted] = accum.try_emplace(key, CycNumber(0));
                it->second = it->second + (*x.coeff) * (*y.coeff);
            }
        }
        for (auto& [k, c] : accum)
            if (!c.is_zero()) out.terms_.emplace(k, std::move(c));
        return out;
    }

    std::string str() const {
        if (terms_.empty()) return "0 (valid to " + valid_to_.str() + ")";
        std::string s;
        for (const auto& [k, c] : terms_) {
            if (!s.empty()) s += " + ";
            s += c.str() + "*" + k.str();
        }
        return s + " (valid to " + valid_to_.str() + ")";
    }

private:
    FormalSeries(ExponentLattice lattice, Grade valid_to)
        : lattice_(std::move(lattice)), valid_to_(std::move(valid_to)) {}

    static void require_same_lattice(const FormalSeries& a,
                                     const FormalSeries& b, const char* op) {
        if (a.lattice_ != b.lattice_)
            throw UsageError(std::string("cannot ") + op +
                             " series over different lattices");
    }

    ExponentLattice lattice_;
    TermMap terms_;
    Grade valid_to_;
};

/// (1 + c * x^key)^exponent expanded by the binomial series, truncated at
/// valid_to. For negative exponents the monomial must be positively graded,
/// otherwise the expansion does not live in this chamber.
inline FormalSeries pow_one_plus_monomial(const ExponentLattice& lattice,
                                          const CycNumber& coeff,
                                          const ExponentKey& key,
                                          long long exponent, Grade valid_to) {
    Rational g = lattice.grade(key);
    if (exponent < 0) {
        if (g <= 0)
            throw ChamberError(
                "binomial inverse of 1 + c*x with lambda(x) <= 0 "
                "does not converge in this chamber");
        if (!valid_to.is_finite())
            throw UsageError("infinite expansion of a binomial inverse");
    }
    FormalSeries out = FormalSeries::zero(lattice, valid_to);
    std::int64_t thr = lattice.grade_threshold(valid_to);
    Rational binom(1);
    CycNumber cpow(1);
    ExponentKey e = lattice.zero_key();
    for (long long i = 0;; ++i) {
        std::int64_t ge = lattice.grade_scaled(e);
        if (exponent < 0 && ge > thr) break; // grades strictly increase
        if (ge <= thr) {
            CycNumber c = cpow.scaled(binom);
            if (!c.is_zero()) out.set_term(e, out.coefficient(e) + c);
        }
        if (exponent >= 0 && i == exponent) break;
        // C(exponent, i+1) from C(exponent, i); exact for negative exponents
        binom *= Rational(exponent - i, i + 1);
        cpow = cpow * coeff;
        e += key;
    }
    return out;
}

/// Inverse of a unit series a = c * m * (1 + h) with a unique minimal-grade
/// leading term c*m and strictly larger grades elsewhere. The result is
/// valid to a.valid_to - 2*lambda(m), intersected with the optional cap;
/// pure monomials invert exactly.
inline FormalSeries series_inverse_unit(
    const FormalSeries& a, std::optional<Grade> cap = std::nullopt) {
    if (a.is_zero()) throw DomainError("inverse of the zero series");
    const ExponentLattice& lat = a.lattice();

    // locate the unique minimal-grade term
    auto lead = a.terms().begin();
    std::int64_t best = lat.grade_scaled(lead->first);
    bool unique = true;
    for (auto it = std::next(a.terms().begin()); it != a.terms().end(); ++it) {
        std::int64_t g = lat.grade_scaled(it->first);
        if (g < best) {
            lead = it;
            best = g;
            unique = true;
        } else if (g == best) {
            unique = false;
        }
    }
    if (!unique)
        throw DomainError("leading term is not the unique minimal-grade term");

    Rational g0 = lat.grade(lead->first);
    ExponentKey inv_key = lat.zero_key();
    inv_key.q_num = -lead->first.q_num;
    for (std::size_t i = 0; i < inv_key.t_num.size(); ++i)
        inv_key.t_num[i] = -lead->first.t_num[i];
    CycNumber inv_coeff = lead->second.inverse();
    FormalSeries inv_mono = FormalSeries::monomial(lat, inv_key, inv_coeff);

    bool pure_monomial = a.terms().size() == 1;
    Grade rule = a.valid_to() + Grade(-2 * g0);
    if (pure_monomial && !a.valid_to().is_finite()) rule = Grade::infinity();
    Grade target = cap ? min(rule, *cap) : rule;
    if (pure_monomial) return inv_mono.truncated(target);
    if (!target.is_finite())
        throw UsageError("inverse of a non-monomial series needs a finite "
                         "validity bound or an explicit cap");

    // h = a * (c*m)^{-1} - 1 carries strictly positive grades
    Grade h_valid = target + Grade(g0);
    FormalSeries h =
        FormalSeries::mul(a, inv_mono, h_valid) - FormalSeries::one(lat, h_valid);
    FormalSeries acc = FormalSeries::one(lat, h_valid);
    FormalSeries power = FormalSeries::one(lat, h_valid);
    while (true) {
        power = FormalSeries::mul(power, -h, h_valid);
        if (power.is_zero()) break;
        acc = acc + power;
    }
    return FormalSeries::mul(inv_mono, acc, target);
}

/// exp of a strictly positively graded series.
inline FormalSeries series_exp(const FormalSeries& a,
                               std::optional<Grade> cap = std::nullopt) {
    const ExponentLattice& lat = a.lattice();
    for (const auto& [k, c] : a.terms())
        if (lat.grade(k) <= 0)
            throw DomainError("exp needs every term strictly positively "
                              "graded; found " + k.str());
    Grade target = cap ? min(a.valid_to(), *cap) : a.valid_to();
    if (a.terms().empty()) return FormalSeries::one(lat, target);
    if (!target.is_finite())
        throw UsageError("exp of a nonzero series needs a finite validity "
                         "bound or an explicit cap");
    FormalSeries acc = FormalSeries::one(lat, target);
    FormalSeries power = FormalSeries::one(lat, target);
    Rational factorial(1);
    for (long long i = 1;; ++i) {
        power = FormalSeries::mul(power, a, target);
        if (power.is_zero()) break;
        factorial *= i;
        acc = acc + power.scaled(CycNumber(Rational(1) / factorial));
    }
    return acc;
}

/// log of 1 + h with h strictly positively graded; the constant term must be
/// exactly 1.
inline FormalSeries series_log(const FormalSeries& a,
                               std::optional<Grade> cap = std::nullopt) {
    const ExponentLattice& lat = a.lattice();
    ExponentKey zero = lat.zero_key();
    for (const auto& [k, c] : a.terms()) {
        if (k == zero) {
            if (!c.is_one())
                throw DomainError("log needs constant term exactly 1");
        } else if (lat.grade(k) <= 0) {
            throw DomainError("log needs every non-constant term strictly "
                              "positively graded; found " + k.str());
        }
    }
    if (a.terms().find(zero) == a.terms().end())
        throw DomainError("log needs constant term exactly 1");
    Grade target = cap ? min(a.valid_to(), *cap) : a.valid_to();
    if (a.terms().size() == 1) return FormalSeries::zero(lat, target);
    if (!target.is_finite())
        throw UsageError("log of a non-constant series needs a finite "
                         "validity bound or an explicit cap");
    FormalSeries h = a - FormalSeries::one(lat, target);
    FormalSeries acc = FormalSeries::zero(lat, target);
    FormalSeries power = FormalSeries::one(lat, target);
    for (long long i = 1;; ++i) {
        power = FormalSeries::mul(power, h, target);
        if (power.is_zero()) break;
        Rational c = Rational(i % 2 == 1 ? 1 : -1, i);
        acc = acc + power.scaled(CycNumber(c));
    }
    return acc;
}

/// Integer power; negative exponents go through series_inverse_unit.
inline FormalSeries series_int_pow(const FormalSeries& a, long long exponent,
                                   std::optional<Grade> cap = std::nullopt) {
    if (exponent < 0) return series_int_pow(series_inverse_unit(a, cap), -exponent, cap);
    Grade target = cap ? *cap : Grade::infinity();
    if (exponent == 0) return FormalSeries::one(a.lattice(), target);
    FormalSeries base = a;
    std::optional<FormalSeries> acc;
    long long e = exponent;
    while (true) {
        if (e & 1) acc = acc ? FormalSeries::mul(*acc, base, target) : base;
        e >>= 1;
        if (e == 0) break;
        base = FormalSeries::mul(base, base, target);
    }
    return *acc;
}

/// Re-labels exponents by q -> q + q_shift (a fixed rational shift) and an
/// invertible integer matrix on the t block, landing in target_lattice.
///
/// Validity: when the target grading pulls back to alpha * (source grading)
/// + const with alpha > 0 the validity ball maps exactly and the bound
/// becomes alpha * valid + const. Fully exact series (valid_to = infinity)
/// transport under any invertible map. Anything else would silently turn
/// exact coefficients into unknown ones, so it is refused.
inline FormalSeries series_substitute_lattice(
    const FormalSeries& a, const Rational& q_shift,
    const std::vector<std::vector<std::int64_t>>& t_map,
    const ExponentLattice& target_lattice) {
    const ExponentLattice& src = a.lattice();
    unsigned rank = src.rank();
    if (target_lattice.rank() != rank)
        throw UsageError("substitution cannot change the lattice rank");
    if (t_map.size() != rank)
        throw UsageError("t map must be a rank x rank integer matrix");
    for (const auto& row : t_map)
        if (row.size() != rank)
            throw UsageError("t map must be a rank x rank integer matrix");

    // exact integer determinant by fraction-free elimination on rationals
    {
        std::vector<std::vector<Rational>> m(rank, std::vector<Rational>(rank));
        for (unsigned i = 0; i < rank; ++i)
            for (unsigned j = 0; j < rank; ++j) m[i][j] = Rational(t_map[i][j]);
        Rational det(1);
        for (unsigned col = 0; col < rank; ++col) {
            unsigned pivot = col;
            while (pivot < rank && m[pivot][col] == 0) ++pivot;
            if (pivot == rank) { det = 0; break; }
            if (pivot != col) { std::swap(m[pivot], m[col]); det = -det; }
            det *= m[col][col];
            for (unsigned r = col + 1; r < rank; ++r) {
                if (m[r][col] == 0) continue;
                Rational f = m[r][col] / m[col][col];
                for (unsigned c2 = col; c2 < rank; ++c2) m[r][c2] -= f * m[col][c2];
            }
        }
        if (det == 0) throw UsageError("substitution matrix is singular");
    }

    Rational shift_num_r = q_shift * src.q_denominator();
    if (denominator(shift_num_r) != 1)
        throw UsageError("q shift is not representable over the q denominator");
    std::int64_t shift_num = static_cast<std::int64_t>(numerator(shift_num_r));

    // pulled-back grading: lambda_dst(map(e)) as a functional of e
    Grade new_valid = Grade::infinity();
    if (a.valid_to().is_finite()) {
        Rational alpha = (target_lattice.weight_q() / target_lattice.q_denominator()) /
                         (src.weight_q() / src.q_denominator());
        bool proportional = alpha > 0;
        for (unsigned j = 0; proportional && j < rank; ++j) {
            Rational pulled(0);
            for (unsigned i = 0; i < rank; ++i)
                pulled += target_lattice.weight_t()[i] * t_map[i][j];
            pulled /= target_lattice.t_denominator();
            Rational expected = alpha * src.weight_t()[j] / src.t_denominator();
            if (pulled != expected) proportional = false;
        }
        if (!proportional)
            throw UsageError("substitution does not transport the validity "
                             "bound: target grading is not proportional to "
                             "the source grading");
        Rational constant = target_lattice.weight_q() * q_shift;
        new_valid = Grade(alpha * a.valid_to().value() + constant);
    }

    FormalSeries out = FormalSeries::zero(target_lattice, new_valid);
    for (const auto& [k, c] : a.terms()) {
        ExponentKey nk = target_lattice.zero_key();
        nk.q_num = k.q_num + shift_num;
        for (unsigned i = 0; i < rank; ++i) {
            std::int64_t v = 0;
            for (unsigned j = 0; j < rank; ++j) v += t_map[i][j] * k.t_num[j];
            nk.t_num[i] = v;
        }
        out.set_term(nk, c);
    }
    return out;
}

/// Substitutes t_d -> q * t_d in one t direction: every term picks up the
/// q power matching its t exponent there.
///
/// The validity bound is recomputed from the shifted support: a term with
/// t exponent x (in natural units) moves from grade g to g + w_q * x, so the
/// ball that provably maps inside the image region is valid + w_q * x_min
/// with x_min the smallest direction exponent in the stored support
/// (clamped at 0). This is exact when terms beyond the old bound do not
/// extend the t support below x_min, which holds for the theta-like series
/// this library builds (their t range grows only with strongly increasing
/// q grades).
inline FormalSeries series_elliptic_shift(const FormalSeries& a,
                                          unsigned direction) {
    const ExponentLattice& lat = a.lattice();
    if (direction >= lat.rank())
        throw UsageError("elliptic shift direction out of range");
    if (lat.q_denominator() % lat.t_denominator() != 0)
        throw UsageError("elliptic shift needs t_den | q_den");
    std::int64_t step = lat.q_denominator() / lat.t_denominator();

    Grade new_valid = a.valid_to();
    if (a.valid_to().is_finite() && !a.terms().empty()) {
        std::int64_t x_min = 0;
        for (const auto& [k, c] : a.terms())
            x_min = std::min(x_min, k.t_num[direction]);
        Rational delta = lat.weight_q() * Rational(x_min, lat.t_denominator());
        new_valid = Grade(a.valid_to().value() + delta);
    }
    FormalSeries out = FormalSeries::zero(lat, new_valid);
    for (const auto& [k, c] : a.terms()) {
        ExponentKey nk = k;
        nk.q_num += k.t_num[direction] * step;
        out.set_term(nk, c);
    }
    return out;
}

struct ProductFactor {
    FormalSeries series;
    long long exponent = 1;
};

/// Multiplies out a stream of factors (1 + h_i)^{e_i}, truncating at
/// valid_to. Factors must arrive with non-decreasing leading grade
/// delta_i = min lambda over h_i, and every h_i term must be strictly
/// positively graded; the stream is cut off once delta exceeds valid_to,
/// which bounds the number of factors consumed. Factors that are a single
/// binomial take a closed-form power instead of repeated squaring.
inline FormalSeries series_product_stream(
    const ExponentLattice& lattice, const Grade& valid_to,
    const std::function<std::optional<ProductFactor>()>& next) {
    if (!valid_to.is_finite())
        throw UsageError("product stream needs a finite validity bound");
    FormalSeries acc = FormalSeries::one(lattice, valid_to);
    std::optional<Rational> last_delta;
    while (auto factor = next()) {
        const FormalSeries& f = factor->series;
        if (f.lattice() != lattice)
            throw UsageError("product stream factor over a different lattice");
        ExponentKey zero = lattice.zero_key();
        auto cit = f.terms().find(zero);
        if (cit == f.terms().end() || !cit->second.is_one())
            throw UsageError("product stream factor must have constant term 1");
        std::optional<Rational> delta;
        for (const auto& [k, c] : f.terms()) {
            if (k == zero) continue;
            Rational g = lattice.grade(k);
            if (g <= 0)
                throw ChamberError("product stream factor term " + k.str() +
                                   " is not positively graded");
            if (!delta || g < *delta) delta = g;
        }
        if (!delta) continue; // factor is exactly 1
        if (last_delta && *delta < *last_delta)
            throw UsageError("product stream factors must arrive in "
                             "non-decreasing leading grade");
        last_delta = *delta;
        if (valid_to < Grade(*delta)) break;

        if (f.terms().size() == 2) {
            auto hit = std::next(f.terms().begin());
            if (hit->first == zero) hit = f.terms().begin();
            FormalSeries p = pow_one_plus_monomial(lattice, hit->second,
                                                   hit->first,
                                                   factor->exponent, valid_to);
            acc = FormalSeries::mul(acc, p, valid_to);
        } else {
            FormalSeries p = series_int_pow(f, factor->exponent, valid_to);
            acc = FormalSeries::mul(acc, p, valid_to);
        }
    }
    return acc;
}

/// Streams a fixed list of factors.
inline std::function<std::optional<ProductFactor>()> factor_list_stream(
    std::vector<ProductFactor> factors) {
    auto state = std::make_shared<std::pair<std::vector<ProductFactor>, std::size_t>>(
        std::move(factors), 0);
    return [state]() -> std::optional<ProductFactor> {
        if (state->second >= state->first.size()) return std::nullopt;
        return state->first[state->second++];
    };
}

/// First key (in lattice order) where the two series disagree on the common
/// validity range, or nullopt when they agree everywhere there.
inline std::optional<ExponentKey> series_first_mismatch(const FormalSeries& a,
                                                        const FormalSeries& b) {
    if (a.lattice() != b.lattice())
        throw UsageError("cannot compare series over different lattices");
    Grade bound = min(a.valid_to(), b.valid_to());
    std::int64_t thr = a.lattice().grade_threshold(bound);
    std::map<ExponentKey, char> keys;
    for (const auto& [k, c] : a.terms())
        if (a.lattice().grade_scaled(k) <= thr) keys[k] = 1;
    for (const auto& [k, c] : b.terms())
        if (a.lattice().grade_scaled(k) <= thr) keys[k] = 1;
    for (const auto& [k, unused] : keys) {
        (void)unused;
        auto ia = a.terms().find(k);
        auto ib = b.terms().find(k);
        CycNumber ca = ia == a.terms().end() ? CycNumber(0) : ia->second;
        CycNumber cb = ib == b.terms().end() ? CycNumber(0) : ib->second;
        if (ca != cb) return k;
    }
    return std::nullopt;
}

inline bool series_equal(const FormalSeries& a, const FormalSeries& b) {
    return !series_first_mismatch(a, b).has_value();
}

} // namespace flopdt
