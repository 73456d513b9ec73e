#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <string>

#include "mcurve/errors.hpp"

namespace mcurve {

/// Exact rational number with 64-bit numerator and positive denominator, always
/// in lowest terms. Exponent formulas are evaluated here so that comparisons at
/// the critical threshold are exact.
class Rational {
public:
    constexpr Rational() = default;
    constexpr Rational(std::int64_t n) : num_(n), den_(1) {} // NOLINT(implicit)
    Rational(std::int64_t n, std::int64_t d) : num_(n), den_(d)
    {
        if (d == 0) throw DomainError("rational with zero denominator");
        normalize();
    }

    /// Best rational approximation with denominator <= max_den (continued
    /// fractions). Exact for decimal inputs such as 3.5 or 1.25.
    static Rational from_double(double x, std::int64_t max_den = 1000000)
    {
        if (!std::isfinite(x)) throw DomainError("rational from non-finite value");
        std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
        double v = x;
        for (int iter = 0; iter < 64; ++iter) {
            const double a = std::floor(v);
            const auto ai = static_cast<std::int64_t>(a);
            const std::int64_t p2 = ai * p1 + p0;
            const std::int64_t q2 = ai * q1 + q0;
            if (q2 > max_den) break;
            p0 = p1;
            q0 = q1;
            p1 = p2;
            q1 = q2;
            const double frac = v - a;
            if (std::abs(static_cast<double>(p1) / static_cast<double>(q1) - x) <=
                    1e-15 * std::max(1.0, std::abs(x)) ||
                frac < 1e-15)
                break;
            v = 1.0 / frac;
        }
        return Rational(p1, q1);
    }

    constexpr std::int64_t num() const { return num_; }
    constexpr std::int64_t den() const { return den_; }
    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    std::string str() const
    {
        return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
    }

    friend Rational operator+(const Rational& a, const Rational& b)
    {
        const std::int64_t g = std::gcd(a.den_, b.den_);
        return Rational(a.num_ * (b.den_ / g) + b.num_ * (a.den_ / g), a.den_ / g * b.den_);
    }
    friend Rational operator-(const Rational& a) { return Rational(-a.num_, a.den_); }
    friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
    friend Rational operator*(const Rational& a, const Rational& b)
    {
        const std::int64_t g1 = std::gcd(a.num_, b.den_);
        const std::int64_t g2 = std::gcd(b.num_, a.den_);
        return Rational((a.num_ / (g1 ? g1 : 1)) * (b.num_ / (g2 ? g2 : 1)),
                        (a.den_ / (g2 ? g2 : 1)) * (b.den_ / (g1 ? g1 : 1)));
    }
    friend Rational operator/(const Rational& a, const Rational& b)
    {
        if (b.num_ == 0) throw DomainError("rational division by zero");
        return a * Rational(b.den_, b.num_);
    }

    friend bool operator==(const Rational& a, const Rational& b) = default;
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b)
    {
        // Denominators are positive, so cross-multiplication preserves order.
        const __int128 lhs = static_cast<__int128>(a.num_) * b.den_;
        const __int128 rhs = static_cast<__int128>(b.num_) * a.den_;
        return lhs < rhs ? std::strong_ordering::less
                         : (lhs > rhs ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

private:
    void normalize()
    {
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        const std::int64_t g = std::gcd(num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

} // namespace mcurve
