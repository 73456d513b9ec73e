#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mcurve/curve_geometry.hpp"
#include "mcurve/errors.hpp"
#include "mcurve/random.hpp"

namespace mcurve {

/// ψ equals 1 on |s| <= kBumpInner and vanishes for |s| >= 2·kBumpInner.
inline constexpr double kBumpInner = 1e-2;
/// φ̃ equals 1 within kTildeInner of the curve and vanishes beyond 2·kTildeInner.
inline constexpr double kTildeInner = 1e-4;
/// Arclength, in units of ε/C0, by which the curve is continued past each end
/// inside the distance oracle of χ̃.
inline constexpr double kEndExtension = 1.5;

/// C^∞ step: 0 for x <= 0, 1 for x >= 1, built from h(s) = exp(-1/s).
inline double smooth_step(double x)
{
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / x);
    const double b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
}

/// One-dimensional profile ψ with inner half-width a and outer half-width 2a.
inline double bump_profile(double s, double a = kBumpInner)
{
    return smooth_step((2.0 * a - std::abs(s)) / a);
}

/// φ(y) = Π_j ψ(y_j).
inline double phi(const Vec& y)
{
    double v = 1.0;
    for (int j = 0; j < y.dim() && v > 0.0; ++j) v *= bump_profile(y[j]);
    return v;
}

/// φ̃ as a function of the distance to the rescaled curve.
inline double phi_tilde(double distance)
{
    return bump_profile(distance, kTildeInner);
}

/// Indices [first, last] of tubes whose χ may be nonzero at a point; empty when
/// first > last.
struct TubeRange {
    int first = 0;
    int last = -1;
    bool empty() const { return first > last; }
    int size() const { return empty() ? 0 : last - first + 1; }
};

/// Tubes Γ_{ε,t_ι} at centers t_ι = ι·ε/C0 (clamped to 1) with their cutoffs
/// χ, χ̃ and the partition of unity η. Immutable after construction.
class TubeCover {
public:
    TubeCover(const CurveSpec& spec, double epsilon, int C0)
        : spec_(spec), curve_(spec), scaling_(epsilon, spec.k), C0_(C0)
    {
        if (C0 < 2 || C0 % 2 != 0) throw DomainError("C0 must be a positive even integer");
        const int k = spec.k;
        const double step = epsilon / C0;
        const auto n = static_cast<int>(std::ceil(C0 / epsilon - 1e-9)) + 1;
        deg_ = curve_.degree();
        centers_.resize(n);
        points_.resize(static_cast<std::size_t>(n) * k);
        frames_.resize(static_cast<std::size_t>(n) * k * k);
        coeffs_.resize(static_cast<std::size_t>(n) * k * deg_);
        speeds_.resize(n);
        for (int i = 0; i < n; ++i) {
            const double t = std::min(i * step, 1.0);
            centers_[i] = t;
            const FrenetFrame f = frenet_frame_at(curve_, t);
            const Vec c = curve_.point(t);
            for (int j = 0; j < k; ++j) points_[static_cast<std::size_t>(i) * k + j] = c[j];
            for (int j = 0; j < k; ++j)
                for (int r = 0; r < k; ++r) frames_[(static_cast<std::size_t>(i) * k + j) * k + r] = f.M(r, j);
            // Rescaled curve c(σ) = D⁻¹Mᵀ(γ(t+εσ) − γ(t)) = Σ_m C[j][m] σ^m with
            // C[j][m] = ε^{m-j-1} <e_j, γ^(m)> / m!; terms with m <= j vanish by the
            // flag property and are set to zero exactly.
            double fact = 1.0;
            for (int m = 1; m <= deg_; ++m) {
                fact *= m;
                const Vec d = curve_.derivative(t, m);
                for (int j = 0; j < k; ++j) {
                    double v = 0.0;
                    if (m >= j + 1) v = std::pow(epsilon, m - j - 1) * f.M.col(j).dot(d) / fact;
                    coeffs_[(static_cast<std::size_t>(i) * k + j) * deg_ + (m - 1)] = v;
                }
            }
            speeds_[i] = curve_.derivative(t, 1).norm();
        }
        t_lo_ = -kEndExtension * step / curve_.derivative(0.0, 1).norm();
        t_hi_ = 1.0 + kEndExtension * step / curve_.derivative(1.0, 1).norm();
    }

    const CurveSpec& spec() const { return spec_; }
    const Curve& curve() const { return curve_; }
    int k() const { return spec_.k; }
    double epsilon() const { return scaling_.epsilon; }
    const AnisotropicScaling& scaling() const { return scaling_; }
    int C0() const { return C0_; }
    int size() const { return static_cast<int>(centers_.size()); }
    double center(int iota) const { return centers_.at(iota); }
    double speed(int iota) const { return speeds_[iota]; }
    /// Parameter interval of the continued curve used by the χ̃ distance oracle.
    double extended_lo() const { return t_lo_; }
    double extended_hi() const { return t_hi_; }

    Vec center_point(int iota) const
    {
        Vec c(k());
        for (int j = 0; j < k(); ++j) c[j] = points_[static_cast<std::size_t>(iota) * k() + j];
        return c;
    }
    /// e_j(t_ι).
    Vec frame_column(int iota, int j) const
    {
        Vec e(k());
        for (int r = 0; r < k(); ++r) e[r] = frames_[(static_cast<std::size_t>(iota) * k() + j) * k() + r];
        return e;
    }
    FrenetFrame frame(int iota) const
    {
        check_index(iota);
        FrenetFrame f;
        f.t = centers_[iota];
        f.M = Mat(k());
        for (int j = 0; j < k(); ++j) f.M.set_col(j, frame_column(iota, j));
        f.orthonormality_residual = (f.M.transpose() * f.M).max_abs_diff(Mat::identity(k()));
        return f;
    }

    /// Anisotropic coordinates y = D⁻¹ M_ιᵀ (ξ − γ(t_ι)).
    Vec coords(int iota, const Vec& xi) const
    {
        const int kk = k();
        const double* c = &points_[static_cast<std::size_t>(iota) * kk];
        const double* M = &frames_[static_cast<std::size_t>(iota) * kk * kk];
        Vec y(kk);
        for (int j = 0; j < kk; ++j) {
            double s = 0.0;
            for (int r = 0; r < kk; ++r) s += M[j * kk + r] * (xi[r] - c[r]);
            y[j] = s / scaling_.diag[j];
        }
        return y;
    }

    /// Point ξ = γ(t_ι) + M_ι D_ε y.
    Vec from_coords(int iota, const Vec& y) const
    {
        const int kk = k();
        Vec xi = center_point(iota);
        const double* M = &frames_[static_cast<std::size_t>(iota) * kk * kk];
        for (int j = 0; j < kk; ++j) {
            const double s = y[j] * scaling_.diag[j];
            for (int r = 0; r < kk; ++r) xi[r] += M[j * kk + r] * s;
        }
        return xi;
    }

    /// Rescaled curve c(σ) of tube ι and its first two σ-derivatives.
    void rescaled_curve(int iota, double sigma, Vec& c, Vec& d1, Vec& d2) const
    {
        const int kk = k();
        c = Vec(kk);
        d1 = Vec(kk);
        d2 = Vec(kk);
        for (int j = 0; j < kk; ++j) {
            const double* C = &coeffs_[(static_cast<std::size_t>(iota) * kk + j) * deg_];
            double v = 0.0, v1 = 0.0, v2 = 0.0;
            for (int m = deg_; m >= 1; --m) {
                v2 = v2 * sigma + 2.0 * v1;
                v1 = v1 * sigma + v;
                v = v * sigma + C[m - 1];
            }
            // Horner above evaluates q(σ) = Σ C_m σ^{m-1}; c = σ q.
            c[j] = sigma * v;
            d1[j] = v + sigma * v1;
            d2[j] = 2.0 * v1 + sigma * v2;
        }
    }
    Vec rescaled_point(int iota, double sigma) const
    {
        Vec c, d1, d2;
        rescaled_curve(iota, sigma, c, d1, d2);
        return c;
    }
    /// Coefficient of σ^m (m >= 1) in component j of the rescaled curve.
    double rescaled_coefficient(int iota, int j, int m) const
    {
        return coeffs_[(static_cast<std::size_t>(iota) * k() + j) * deg_ + (m - 1)];
    }
    int rescaled_degree() const { return deg_; }

    /// Euclidean distance from y to the rescaled (continued) curve of tube ι.
    double curve_distance(int iota, const Vec& y) const
    {
        const double sig_lo = (t_lo_ - centers_[iota]) / epsilon();
        const double sig_hi = (t_hi_ - centers_[iota]) / epsilon();
        Vec c, d1, d2;
        // Start where the first rescaled coordinate matches y_1.
        double s = y[0] / speeds_[iota];
        for (int it = 0; it < 20; ++it) {
            rescaled_curve(iota, s, c, d1, d2);
            const double ds = (c[0] - y[0]) / d1[0];
            s -= ds;
            if (std::abs(ds) < 1e-15 * (1.0 + std::abs(s))) break;
        }
        s = std::clamp(s, sig_lo, sig_hi);
        rescaled_curve(iota, s, c, d1, d2);
        const double upper = (c - y).norm();
        if (upper <= kTildeInner * (1.0 - 1e-12)) return upper;
        // Newton on the stationarity condition (c(σ) − y)·c'(σ) = 0.
        for (int it = 0; it < 40; ++it) {
            const Vec r = c - y;
            const double g = r.dot(d1);
            const double h = d1.dot(d1) + r.dot(d2);
            double ds = h > 0.0 ? g / h : g / d1.dot(d1);
            const double s_new = std::clamp(s - ds, sig_lo, sig_hi);
            ds = s - s_new;
            s = s_new;
            rescaled_curve(iota, s, c, d1, d2);
            if (std::abs(ds) < 1e-14 * (1.0 + std::abs(s))) break;
        }
        return std::min(upper, (c - y).norm());
    }

    double chi(int iota, const Vec& xi) const
    {
        check_index(iota);
        return phi(coords(iota, xi));
    }
    double chi_tilde(int iota, const Vec& xi) const
    {
        check_index(iota);
        return phi_tilde(curve_distance(iota, coords(iota, xi)));
    }

    /// Foot-point parameter of ξ on the continued curve, by Newton from the
    /// guess `hint` (ξ_1 when negative infinity).
    double foot_parameter(const Vec& xi, double hint = -INFINITY) const
    {
        const double lo = t_lo_ - 0.1 * epsilon(), hi = t_hi_ + 0.1 * epsilon();
        double t = std::clamp(std::isfinite(hint) ? hint : xi[0], lo, hi);
        for (int it = 0; it < 30; ++it) {
            const Vec r = xi - curve_.point(t);
            const Vec d1 = curve_.derivative(t, 1);
            const Vec d2 = curve_.derivative(t, 2);
            const double g = r.dot(d1);
            double h = d1.dot(d1) - r.dot(d2);
            if (h <= 0.0) h = d1.dot(d1);
            const double t_new = std::clamp(t + g / h, lo, hi);
            const double dt = t_new - t;
            t = t_new;
            if (std::abs(dt) < 1e-15) break;
        }
        return t;
    }

    /// Tubes whose χ can be nonzero at ξ. The window is a superset of the true
    /// active set: χ_ι(ξ) > 0 forces |t_ι − t_foot| below 0.02·ε/|γ'| up to
    /// curvature corrections, and the window allows 0.035·ε/|γ'|.
    TubeRange active_tubes(const Vec& xi, double hint = -INFINITY) const
    {
        const double tf = foot_parameter(xi, hint);
        if ((xi - curve_.point(tf)).norm() > 0.05 * epsilon()) return {};
        const double half = 0.035 * epsilon() / curve_.derivative(tf, 1).norm();
        const double step = epsilon() / C0_;
        TubeRange r;
        r.first = std::max(0, static_cast<int>(std::ceil((tf - half) / step)));
        r.last = std::min(size() - 1, static_cast<int>(std::floor((tf + half) / step)));
        if (centers_.back() >= tf - half && centers_.back() <= tf + half) r.last = size() - 1;
        return r;
    }

    /// Σ_ι χ_ι(ξ) over the active window.
    double sum_chi(const Vec& xi, double hint = -INFINITY) const
    {
        const TubeRange r = active_tubes(xi, hint);
        double s = 0.0;
        for (int i = r.first; i <= r.last; ++i) s += phi(coords(i, xi));
        return s;
    }

    /// η_ι = χ_ι χ̃_ι / Σχ, with η_ι = 0 where χ_ι χ̃_ι = 0.
    double eta(int iota, const Vec& xi, double hint = -INFINITY) const
    {
        check_index(iota);
        const Vec y = coords(iota, xi);
        const double c = phi(y);
        if (c == 0.0) return 0.0;
        const double ct = phi_tilde(curve_distance(iota, y));
        if (ct == 0.0) return 0.0;
        return c * ct / sum_chi(xi, hint);
    }

    /// η_{Γ_ε}(ξ) = Σ_ι η_ι(ξ), summed over the active window.
    double eta_total(const Vec& xi, double hint = -INFINITY) const
    {
        const TubeRange r = active_tubes(xi, hint);
        double num = 0.0, den = 0.0;
        for (int i = r.first; i <= r.last; ++i) {
            const Vec y = coords(i, xi);
            const double c = phi(y);
            if (c == 0.0) continue;
            den += c;
            const double ct = phi_tilde(curve_distance(i, y));
            num += c * ct;
        }
        return den > 0.0 ? num / den : 0.0;
    }

private:
    void check_index(int iota) const
    {
        if (iota < 0 || iota >= size())
            throw DomainError("tube index " + std::to_string(iota) + " out of range [0, " +
                              std::to_string(size() - 1) + "]");
    }

    CurveSpec spec_;
    Curve curve_;
    AnisotropicScaling scaling_;
    int C0_;
    int deg_ = 0;
    double t_lo_ = 0.0, t_hi_ = 1.0;
    std::vector<double> centers_, points_, frames_, coeffs_, speeds_;
};

/// Point of the thin tube Γ_{s,t} = γ(t) + M_t D_s y for y ∈ [-1, 1]^k.
inline Vec tube_point(const Curve& curve, double t, double s, const Vec& y)
{
    const FrenetFrame f = frenet_frame_at(curve, t);
    Vec xi = curve.point(t);
    double p = 1.0;
    for (int j = 0; j < curve.k(); ++j) {
        p *= s;
        xi += f.M.col(j) * (y[j] * p);
    }
    return xi;
}

/// Stratified sample of Γ_{ε/C0}: stratum i draws t uniformly from
/// [i/n, (i+1)/n) and y uniformly from [-1, 1]^k.
inline std::vector<Vec> sample_thin_tube(const TubeCover& cover, int n, std::uint64_t seed)
{
    std::vector<Vec> pts;
    pts.reserve(n);
    const double s = cover.epsilon() / cover.C0();
    for (int i = 0; i < n; ++i) {
        auto rng = stratum_rng(seed, {0x7475626555ull, static_cast<std::uint64_t>(i)});
        const double t = std::min(1.0, (i + uniform01(rng)) / n);
        Vec y(cover.k());
        for (int j = 0; j < cover.k(); ++j) y[j] = 2.0 * uniform01(rng) - 1.0;
        pts.push_back(tube_point(cover.curve(), t, s, y));
    }
    return pts;
}

/// Sampled quality of a cover on Γ_{ε/C0}.
struct CoverDiagnostics {
    int C0 = 0;
    int samples = 0;
    double min_sum_chi = 0.0;
    /// max over samples and tubes of χ_ι |1 − χ̃_ι|: zero when χ̃ absorbs χ.
    double max_absorption_defect = 0.0;
    /// Largest number of tubes with χ > 0 at one sample.
    int max_overlap = 0;
    bool valid() const { return min_sum_chi >= 0.5 && max_absorption_defect <= 1e-8; }
};

inline CoverDiagnostics diagnose_cover(const TubeCover& cover, int samples, std::uint64_t seed)
{
    CoverDiagnostics d;
    d.C0 = cover.C0();
    d.samples = samples;
    d.min_sum_chi = 1e300;
    for (const Vec& xi : sample_thin_tube(cover, samples, seed)) {
        const TubeRange r = cover.active_tubes(xi);
        double sum = 0.0;
        int count = 0;
        for (int i = r.first; i <= r.last; ++i) {
            const Vec y = cover.coords(i, xi);
            const double c = phi(y);
            if (c == 0.0) continue;
            ++count;
            sum += c;
            const double ct = phi_tilde(cover.curve_distance(i, y));
            d.max_absorption_defect = std::max(d.max_absorption_defect, c * (1.0 - ct));
        }
        d.min_sum_chi = std::min(d.min_sum_chi, sum);
        d.max_overlap = std::max(d.max_overlap, count);
    }
    return d;
}

struct Calibration {
    int C0 = 0;
    CoverDiagnostics diagnostics;
};

inline constexpr std::uint64_t kCalibrationSeed = 0x5eed0c0ull;

/// Smallest C0 in {2, 4, …, 2^10} for which Σχ >= 1/2 and χχ̃ = χ hold on a
/// stratified sample of Γ_{ε/C0}.
inline Calibration calibrate_C0(const CurveSpec& spec, double epsilon, int samples = 10000,
                                std::uint64_t seed = kCalibrationSeed)
{
    spec.validate();
    if (!(epsilon > 0.0 && epsilon <= 0.25)) throw DomainError("epsilon must lie in (0, 1/4]");
    CoverDiagnostics last;
    for (int C0 = 2; C0 <= 1024; C0 *= 2) {
        const TubeCover cover(spec, epsilon, C0);
        last = diagnose_cover(cover, samples, seed);
        if (last.valid()) return {C0, last};
    }
    throw CalibrationError("no C0 <= 1024 yields a valid cover (min sum chi " +
                           std::to_string(last.min_sum_chi) + ", absorption defect " +
                           std::to_string(last.max_absorption_defect) + ")");
}

} // namespace mcurve
