#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <string>

#include "flopdt/errors.hpp"

namespace flopdt {

/// Exact arbitrary-precision rational. All arithmetic in this library is
/// exact; no floating point value ever enters a computation or a file.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline Rational make_rational(long long num, long long den = 1) {
    if (den == 0) throw DomainError("rational with zero denominator");
    return Rational(BigInt(num), BigInt(den));
}

/// Floor of a rational as a big integer (round toward minus infinity).
inline BigInt rational_floor(const Rational& r) {
    BigInt q = numerator(r) / denominator(r);
    if (numerator(r) < 0 && q * denominator(r) != numerator(r)) --q;
    return q;
}

inline BigInt rational_ceil(const Rational& r) { return -rational_floor(-r); }

/// Parses "p", "p/q" or "-p/q". Whitespace is not accepted; this is the
/// exact inverse of format_rational.
inline Rational parse_rational(const std::string& text) {
    if (text.empty()) throw ParseError("empty rational literal");
    std::size_t slash = text.find('/');
    try {
        if (slash == std::string::npos) return Rational(BigInt(text));
        BigInt num(text.substr(0, slash));
        BigInt den(text.substr(slash + 1));
        if (den == 0) throw ParseError("zero denominator in '" + text + "'");
        return Rational(num, den);
    } catch (const ParseError&) {
        throw;
    } catch (const std::runtime_error&) {
        throw ParseError("malformed rational literal '" + text + "'");
    }
}

inline std::string format_rational(const Rational& r) {
    std::string s = numerator(r).str();
    if (denominator(r) != 1) s += "/" + denominator(r).str();
    return s;
}

/// A rational extended with +infinity. Used for validity bounds, where the
/// zero series and exact polynomials are valid to every order.
class Grade {
public:
    Grade() : finite_(true), value_(0) {}
    Grade(const Rational& v) : finite_(true), value_(v) {}
    Grade(long long v) : finite_(true), value_(v) {}
    static Grade infinity() {
        Grade g;
        g.finite_ = false;
        return g;
    }

    bool is_finite() const { return finite_; }

    /// Finite value accessor; throws on +infinity.
    const Rational& value() const {
        if (!finite_) throw UsageError("infinite grade has no finite value");
        return value_;
    }

    friend Grade operator+(const Grade& a, const Grade& b) {
        if (!a.finite_ || !b.finite_) return infinity();
        return Grade(a.value_ + b.value_);
    }
    friend bool operator==(const Grade& a, const Grade& b) {
        if (a.finite_ != b.finite_) return false;
        return !a.finite_ || a.value_ == b.value_;
    }
    friend bool operator<(const Grade& a, const Grade& b) {
        if (!a.finite_) return false;
        if (!b.finite_) return true;
        return a.value_ < b.value_;
    }
    friend bool operator<=(const Grade& a, const Grade& b) { return a < b || a == b; }

    friend Grade min(const Grade& a, const Grade& b) { return a < b ? a : b; }

    std::string str() const { return finite_ ? format_rational(value_) : "inf"; }

    static Grade parse(const std::string& text) {
        if (text == "inf") return infinity();
        return Grade(parse_rational(text));
    }

private:
    bool finite_;
    Rational value_;
};

} // namespace flopdt
