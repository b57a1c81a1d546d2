#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flopdt/errors.hpp"
#include "flopdt/rational.hpp"

namespace flopdt {

/// One exponent of a series term: q exponent q_num / q_denominator and
/// t exponents t_num[i] / t_denominator with respect to a rank-k lattice.
struct ExponentKey {
    std::int64_t q_num = 0;
    std::vector<std::int64_t> t_num;

    friend bool operator==(const ExponentKey&, const ExponentKey&) = default;
    friend bool operator<(const ExponentKey& a, const ExponentKey& b) {
        if (a.q_num != b.q_num) return a.q_num < b.q_num;
        return a.t_num < b.t_num;
    }

    ExponentKey& operator+=(const ExponentKey& o) {
        q_num += o.q_num;
        for (std::size_t i = 0; i < t_num.size(); ++i) t_num[i] += o.t_num[i];
        return *this;
    }
    friend ExponentKey operator+(ExponentKey a, const ExponentKey& b) {
        a += b;
        return a;
    }

    std::string str() const {
        std::string s = "(" + std::to_string(q_num) + ";";
        for (std::size_t i = 0; i < t_num.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(t_num[i]);
        }
        return s + ")";
    }
};

struct ExponentKeyHash {
    std::size_t operator()(const ExponentKey& k) const {
        std::uint64_t h = 1469598103934665603ull;
        auto mix = [&h](std::uint64_t v) {
            h ^= v;
            h *= 1099511628211ull;
        };
        mix(static_cast<std::uint64_t>(k.q_num));
        for (auto t : k.t_num) mix(static_cast<std::uint64_t>(t));
        return static_cast<std::size_t>(h);
    }
};

/// The exponent lattice of a series: denominators for the q and t directions
/// and the grading functional
///
///   lambda(e) = w_q * (q exponent) + sum_i w_t[i] * (t exponent_i)
///
/// with w_q > 0. Truncation, validity bounds and termination arguments are
/// all phrased in terms of lambda. The grading is evaluated in exact integer
/// arithmetic over a precomputed common denominator.
class ExponentLattice {
public:
    ExponentLattice() : ExponentLattice(1, 24, 2, Rational(1), {Rational(0)}) {}

    ExponentLattice(unsigned rank, std::int64_t q_den, std::int64_t t_den,
                    Rational w_q, std::vector<Rational> w_t)
        : rank_(rank),
          q_den_(q_den),
          t_den_(t_den),
          w_q_(std::move(w_q)),
          w_t_(std::move(w_t)) {
        if (rank_ == 0) throw UsageError("lattice rank must be at least 1");
        if (q_den_ <= 0 || t_den_ <= 0)
            throw UsageError("lattice denominators must be positive");
        if (w_q_ <= 0) throw UsageError("the q grading weight must be positive");
        if (w_t_.size() != rank_)
            throw UsageError("t weight vector length must equal the rank");
        rebuild_integer_grading();
    }

    unsigned rank() const { return rank_; }
    std::int64_t q_denominator() const { return q_den_; }
    std::int64_t t_denominator() const { return t_den_; }
    const Rational& weight_q() const { return w_q_; }
    const std::vector<Rational>& weight_t() const { return w_t_; }

    friend bool operator==(const ExponentLattice& a, const ExponentLattice& b) {
        return a.rank_ == b.rank_ && a.q_den_ == b.q_den_ &&
               a.t_den_ == b.t_den_ && a.w_q_ == b.w_q_ && a.w_t_ == b.w_t_;
    }
    friend bool operator!=(const ExponentLattice& a, const ExponentLattice& b) {
        return !(a == b);
    }

    /// The same lattice with the t weight negated in one direction. This is
    /// the mirror chamber used on the other side of a flop.
    ExponentLattice flipped(unsigned index) const {
        auto w = w_t_;
        if (index >= rank_) throw UsageError("flip index out of range");
        w[index] = -w[index];
        return ExponentLattice(rank_, q_den_, t_den_, w_q_, std::move(w));
    }

    ExponentKey zero_key() const {
        ExponentKey k;
        k.t_num.assign(rank_, 0);
        return k;
    }

    /// Key for q^a t^b with rational exponents given in natural units
    /// (b[i] is the exponent of the i-th t direction). Throws when an
    /// exponent is not representable over the lattice denominators.
    ExponentKey key(const Rational& q_exp,
                    const std::vector<Rational>& t_exp) const {
        if (t_exp.size() != rank_)
            throw UsageError("t exponent vector length must equal the rank");
        ExponentKey k;
        k.q_num = scaled_to_int(q_exp, q_den_, "q");
        k.t_num.reserve(rank_);
        for (const auto& b : t_exp)
            k.t_num.push_back(scaled_to_int(b, t_den_, "t"));
        return k;
    }

    ExponentKey q_key(const Rational& q_exp) const {
        return key(q_exp, std::vector<Rational>(rank_, Rational(0)));
    }

    Rational q_exponent(const ExponentKey& k) const {
        return Rational(k.q_num, q_den_);
    }
    Rational t_exponent(const ExponentKey& k, unsigned i) const {
        return Rational(k.t_num.at(i), t_den_);
    }

    /// lambda as an exact rational.
    Rational grade(const ExponentKey& k) const {
        return Rational(grade_scaled(k), scale_);
    }

    /// lambda multiplied by the lattice scale, as an integer. Cheap enough
    /// for the convolution inner loop.
    std::int64_t grade_scaled(const ExponentKey& k) const {
        std::int64_t g = cq_ * k.q_num;
        for (std::size_t i = 0; i < k.t_num.size(); ++i)
            g += ct_[i] * k.t_num[i];
        return g;
    }

    /// Largest integer threshold T with: grade_scaled(e) <= T iff
    /// lambda(e) <= bound. Infinite bounds accept everything.
    std::int64_t grade_threshold(const Grade& bound) const {
        if (!bound.is_finite()) return INT64_MAX;
        return static_cast<std::int64_t>(rational_floor(bound.value() * scale_));
    }

    std::int64_t scale() const { return scale_; }

private:
    static std::int64_t scaled_to_int(const Rational& value, std::int64_t den,
                                      const char* which) {
        Rational scaled = value * den;
        if (denominator(scaled) != 1)
            throw UsageError(std::string("exponent ") + format_rational(value) +
                             " is not representable over the " + which +
                             " denominator " + std::to_string(den));
        BigInt num = numerator(scaled);
        if (num > INT64_MAX / 4 || num < INT64_MIN / 4)
            throw CapacityError("exponent numerator out of range");
        return static_cast<std::int64_t>(num);
    }

    void rebuild_integer_grading() {
        BigInt scale = BigInt(q_den_) * denominator(w_q_);
        for (const auto& w : w_t_)
            scale = boost::multiprecision::lcm(scale,
                                               BigInt(t_den_) * denominator(w));
        BigInt cq = numerator(w_q_) * (scale / (BigInt(q_den_) * denominator(w_q_)));
        std::vector<BigInt> ct;
        ct.reserve(rank_);
        for (const auto& w : w_t_)
            ct.push_back(numerator(w) * (scale / (BigInt(t_den_) * denominator(w))));
        BigInt limit = BigInt(1) << 40;
        if (scale > limit || abs(cq) > limit)
            throw CapacityError("grading weights produce an oversized scale");
        for (const auto& c : ct)
            if (abs(c) > limit)
                throw CapacityError("grading weights produce an oversized scale");
        scale_ = static_cast<std::int64_t>(scale);
        cq_ = static_cast<std::int64_t>(cq);
        ct_.clear();
        for (const auto& c : ct) ct_.push_back(static_cast<std::int64_t>(c));
    }

    unsigned rank_;
    std::int64_t q_den_, t_den_;
    Rational w_q_;
    std::vector<Rational> w_t_;
    std::int64_t scale_ = 1, cq_ = 0;
    std::vector<std::int64_t> ct_;
};

} // namespace flopdt
