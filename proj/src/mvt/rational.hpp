#pragma once

#include <cmath>
#include <numeric>
#include <string>

#include "mvt/error.hpp"
#include "mvt/util.hpp"

namespace mvt {

/// Exact rational with 64-bit parts, kept in lowest terms with a positive
/// denominator.  Houses exponents like 3/2, -33/18, 17/3; it is not a
/// general bignum (geometry's exact oracle uses arbitrary precision).
struct Rational {
    i64 num = 0;
    i64 den = 1;

    Rational() = default;
    Rational(i64 n) : num(n), den(1) {}
    Rational(i64 n, i64 d) : num(n), den(d) { normalize(); }

    void normalize() {
        require(den != 0, ErrorCode::invalid_argument, "rational with zero denominator");
        if (den < 0) { num = -num; den = -den; }
        const i64 g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
        if (num == 0) den = 1;
    }

    bool is_integer() const { return den == 1; }
    double to_double() const { return double(num) / double(den); }

    friend Rational operator-(const Rational& a) { return Rational(-a.num, a.den); }
    friend Rational operator+(const Rational& a, const Rational& b) {
        return Rational(a.num * b.den + b.num * a.den, a.den * b.den);
    }
    friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return Rational(a.num * b.num, a.den * b.den);
    }
    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num == b.num && a.den == b.den;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return i128(a.num) * b.den < i128(b.num) * a.den;
    }
    friend bool operator<=(const Rational& a, const Rational& b) {
        return i128(a.num) * b.den <= i128(b.num) * a.den;
    }

    std::string str() const {
        if (den == 1) return std::to_string(num);
        return std::to_string(num) + "/" + std::to_string(den);
    }
};

/// Accepts "3", "-7/2", "1.5" and "-1.2" (decimals become exact fractions).
inline Rational parse_rational(const std::string& text) {
    require(!text.empty(), ErrorCode::invalid_argument, "empty rational literal");
    const auto slash = text.find('/');
    if (slash != std::string::npos) {
        const i64 n = std::stoll(text.substr(0, slash));
        const i64 d = std::stoll(text.substr(slash + 1));
        return Rational(n, d);
    }
    const auto dot = text.find('.');
    if (dot != std::string::npos) {
        std::string digits = text.substr(0, dot) + text.substr(dot + 1);
        const size_t frac_len = text.size() - dot - 1;
        require(frac_len > 0 && frac_len <= 15, ErrorCode::invalid_argument,
                "unsupported decimal literal: " + text);
        i64 den = 1;
        for (size_t i = 0; i < frac_len; ++i) den *= 10;
        return Rational(std::stoll(digits), den);
    }
    return Rational(std::stoll(text));
}

} // namespace mvt
