#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mcurve/errors.hpp"
#include "mcurve/rational.hpp"

namespace mcurve {

/// p_c(k) = (k² + k + 2) / 2.
inline Rational critical_exponent(int k)
{
    if (k < 2) throw DomainError("k must be >= 2");
    return Rational(static_cast<std::int64_t>(k) * k + k + 2, 2);
}

/// Exponent of ε in ‖η‖₂: k(k+1)/4 − 1/2.
inline Rational l2_exponent_theory(int k)
{
    if (k < 2) throw DomainError("k must be >= 2");
    return Rational(static_cast<std::int64_t>(k) * (k + 1), 4) - Rational(1, 2);
}

/// Exponent of ε in the total L¹ bound Σ_ι ‖η̌_ι‖₁ ≲ ε⁻¹.
inline Rational l1_exponent_theory() { return Rational(-1); }

inline Rational conjugate_exponent(const Rational& p)
{
    if (p <= Rational(1)) throw DomainError("conjugate exponent needs p > 1");
    return p / (p - Rational(1));
}

struct InterpolationExponent {
    Rational alpha;
    Rational theta;
    /// Set when p <= 1: the bound degenerates to the L¹ endpoint, α = −1.
    bool l1_endpoint = false;
};

/// α(k, p) = (1 − θ)(−1) + θ (k(k+1)/4 − 1/2) with θ = 2/p, which simplifies to
/// (k² + k + 2)/(2p) − 1.
inline InterpolationExponent interpolation_exponent(int k, const Rational& p)
{
    if (k < 2) throw DomainError("k must be >= 2");
    if (p <= Rational(1)) return {Rational(-1), Rational(0), true};
    const Rational theta = Rational(2) / p;
    const Rational alpha = (Rational(1) - theta) * l1_exponent_theory() + theta * l2_exponent_theory(k);
    return {alpha, theta, false};
}

/// Dyadic scales ε_i = 2^{-m_i}.
struct EpsLadder {
    std::vector<int> exponents;

    void validate() const
    {
        if (exponents.size() < 4) throw DomainError("epsilon ladder needs at least 4 scales");
        for (std::size_t i = 0; i < exponents.size(); ++i) {
            if (exponents[i] < 2) throw DomainError("ladder scales must satisfy epsilon <= 1/4");
            if (i > 0 && exponents[i] <= exponents[i - 1])
                throw DomainError("ladder scales must be strictly decreasing");
        }
    }
    std::vector<double> epsilons() const
    {
        std::vector<double> e;
        for (int m : exponents) e.push_back(std::ldexp(1.0, -m));
        return e;
    }
};

/// Least-squares line log₂(value) = slope·log₂(ε) + intercept.
struct PowerFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_max = 0.0;
    /// Half the spread of the leave-one-out slopes.
    double slope_halfwidth = 0.0;
    int points = 0;
};

namespace detail {

inline std::pair<double, double> least_squares(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw DomainError("power-law fit needs at least two distinct scales");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

} // namespace detail

/// Fit over (ε, value) pairs; requires >= 4 points with positive values.
inline PowerFit fit_power_law(const std::vector<std::pair<double, double>>& points)
{
    if (points.size() < 4) throw DomainError("power-law fit needs at least 4 points");
    std::vector<double> x, y;
    for (const auto& [eps, v] : points) {
        if (!(eps > 0.0)) throw DomainError("power-law fit needs positive scales");
        if (!(v > 0.0)) throw DomainError("power-law fit needs positive values");
        x.push_back(std::log2(eps));
        y.push_back(std::log2(v));
    }
    PowerFit f;
    f.points = static_cast<int>(points.size());
    std::tie(f.slope, f.intercept) = detail::least_squares(x, y);
    for (std::size_t i = 0; i < x.size(); ++i)
        f.residual_max = std::max(f.residual_max, std::abs(y[i] - (f.slope * x[i] + f.intercept)));
    double lo = f.slope, hi = f.slope;
    for (std::size_t skip = 0; skip < x.size(); ++skip) {
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (i != skip) {
                xs.push_back(x[i]);
                ys.push_back(y[i]);
            }
        const double s = detail::least_squares(xs, ys).first;
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    f.slope_halfwidth = 0.5 * (hi - lo);
    return f;
}

/// Measured norms along a ladder, as consumed by the certificate.
struct LadderMeasurements {
    std::vector<double> epsilons;
    /// ‖η‖₂ = ‖η̌‖₂ per scale.
    std::vector<double> l2;
    /// Σ_ι ‖η̌_ι‖₁ per scale.
    std::vector<double> l1_total;
    /// Direct ‖η̌‖_{p'} series keyed by p'.
    std::vector<std::pair<Rational, std::vector<double>>> lp;
};

enum class Verdict { Certified, NotCertified };

inline const char* verdict_name(Verdict v)
{
    return v == Verdict::Certified ? "certified" : "not certified";
}

struct ThresholdReport {
    int k = 2;
    Rational p;
    Rational p_prime;
    Rational theta;
    Rational alpha;
    Rational p_critical;
    Verdict verdict = Verdict::NotCertified;
    /// "direct", "l2", "interpolated" or "none".
    std::string route = "none";
    std::optional<PowerFit> fit;
    std::string explanation;
};

/// Certifies decay of ‖η̌_{Γ_ε}‖_{p'} along the ladder. The verdict is
/// "certified" iff the fitted decay slope is at least α(k, p)/2 > 0; the bound
/// is measured directly when a series for p' exists, and otherwise
/// interpolated as (Σ‖η̌_ι‖₁)^{1−θ}·‖η‖₂^θ.
inline ThresholdReport vanishing_certificate(int k, const Rational& p, const EpsLadder& ladder,
                                             const LadderMeasurements& m)
{
    ladder.validate();
    ThresholdReport r;
    r.k = k;
    r.p = p;
    r.p_critical = critical_exponent(k);
    const InterpolationExponent ie = interpolation_exponent(k, p);
    r.alpha = ie.alpha;
    r.theta = ie.theta;
    if (ie.l1_endpoint) {
        r.explanation = "p <= 1 is the L1 endpoint (alpha = -1); no decay to certify";
        return r;
    }
    r.p_prime = conjugate_exponent(p);
    if (p >= r.p_critical) {
        r.explanation = "p >= p_c = " + r.p_critical.str() + " gives alpha = " + r.alpha.str() +
                        " <= 0: no decay of the dual norm is available at or above the threshold";
        return r;
    }
    const std::size_t n = ladder.exponents.size();
    if (m.epsilons.size() != n) throw DomainError("measurements do not cover the ladder");
    auto series_fit = [&](const std::vector<double>& values) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < n; ++i) pts.emplace_back(m.epsilons[i], values[i]);
        return fit_power_law(pts);
    };
    for (const auto& [pp, values] : m.lp)
        if (pp == r.p_prime && values.size() == n) {
            r.route = "direct";
            r.fit = series_fit(values);
            break;
        }
    if (!r.fit && p == Rational(2) && m.l2.size() == n) {
        r.route = "l2";
        r.fit = series_fit(m.l2);
    }
    if (!r.fit) {
        if (r.theta > Rational(1)) {
            r.explanation = "p < 2 lies outside the L1-L2 interpolation range and no direct series exists";
            return r;
        }
        if (m.l1_total.size() != n || m.l2.size() != n)
            throw DomainError("missing L1/L2 measurements for the interpolated bound");
        const double th = r.theta.to_double();
        std::vector<double> bound(n);
        for (std::size_t i = 0; i < n; ++i)
            bound[i] = std::pow(m.l1_total[i], 1.0 - th) * std::pow(m.l2[i], th);
        r.route = "interpolated";
        r.fit = series_fit(bound);
    }
    const double need = 0.5 * r.alpha.to_double();
    const bool ok = r.fit->slope >= need && r.alpha > Rational(0);
    r.verdict = ok ? Verdict::Certified : Verdict::NotCertified;
    char buf[256];
    if (ok)
        std::snprintf(buf, sizeof buf,
                      "|f|_inf <= |f|_p |eta_check|_{p'} <= C eps^%.4f -> 0 (slope %.4f >= alpha/2 = %.4f)",
                      r.fit->slope, r.fit->slope, need);
    else
        std::snprintf(buf, sizeof buf, "measured slope %.4f below alpha/2 = %.4f", r.fit->slope, need);
    r.explanation = buf;
    return r;
}

} // namespace mcurve
