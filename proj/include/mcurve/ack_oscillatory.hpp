#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "mcurve/errors.hpp"
#include "mcurve/linalg.hpp"
#include "mcurve/parallel.hpp"
#include "mcurve/quadrature.hpp"
#include "mcurve/random.hpp"
#include "mcurve/scaling_analysis.hpp"

namespace mcurve {

using cplx = std::complex<double>;

/// Phase polynomial P_x(t) = Σ_j x_j t^j (j = 1..k).
struct PhaseVector {
    Vec x;

    int k() const { return x.dim(); }
    double value(double t) const
    {
        double s = 0.0;
        for (int j = k() - 1; j >= 0; --j) s = (s + x[j]) * t;
        return s;
    }
    double derivative(double t) const
    {
        double s = 0.0;
        for (int j = k() - 1; j >= 0; --j) s = s * t + (j + 1) * x[j];
        return s;
    }
    /// Upper bound for |P''| on [0, 1].
    double second_derivative_bound() const
    {
        double s = 0.0;
        for (int j = 1; j < k(); ++j) s += std::abs(x[j]) * (j + 1) * j;
        return s;
    }
};

struct OscillatoryResult {
    cplx value;
    double error_bound = 0.0;
    long nodes = 0;
    int panels = 0;
};

inline constexpr long kDefaultNodeBudget = 4'000'000;

namespace detail {

/// Real zeros of P' in (0, 1), located by sign changes on a grid and bisection.
inline std::vector<double> stationary_points(const PhaseVector& P)
{
    std::vector<double> roots;
    if (P.k() < 2) return roots;
    const int grid = 64 * P.k();
    double a = 0.0, fa = P.derivative(0.0);
    for (int i = 1; i <= grid; ++i) {
        const double b = static_cast<double>(i) / grid, fb = P.derivative(b);
        if (fa == 0.0 && a > 0.0) roots.push_back(a);
        if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) {
            double lo = a, hi = b, flo = fa;
            for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
                const double mid = 0.5 * (lo + hi), fm = P.derivative(mid);
                if ((fm < 0.0) == (flo < 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push_back(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    return roots;
}

/// Panel breakpoints on [0, 1] with phase variation <= π/2 per panel; zeros of
/// P' are always breakpoints.
inline std::vector<double> phase_panels(const PhaseVector& P, long max_panels)
{
    const double M2 = P.second_derivative_bound();
    const double limit = 0.5 * std::numbers::pi;
    std::vector<double> cuts = stationary_points(P);
    cuts.push_back(1.0);
    std::vector<double> br{0.0};
    double a = 0.0;
    for (double stop : cuts) {
        while (a < stop) {
            const double d = std::abs(P.derivative(a));
            // |P'(a)| h + M2 h²/2 <= π/2 bounds the phase variation on [a, a+h].
            double h = M2 > 0.0 ? (-d + std::sqrt(d * d + 2.0 * M2 * limit)) / M2 : (d > 0.0 ? limit / d : 1.0);
            h = std::min(h, 0.25);
            a = (a + h >= stop - 1e-15) ? stop : a + h;
            br.push_back(a);
            if (static_cast<long>(br.size()) > max_panels + 1) return br;
        }
    }
    return br;
}

} // namespace detail

/// I(x) = ∫₀¹ exp(i P_x(t)) dt by Gauss–Legendre on phase-bounded panels, with
/// the error certified by the difference of two consecutive orders, or by the
/// rounding floor of the phase when that is larger.
inline OscillatoryResult ack_integral(const PhaseVector& x, double tol = 1e-10, long node_budget = kDefaultNodeBudget)
{
    if (!(tol >= 1e-10)) throw DomainError("ack_integral tolerance must be >= 1e-10");
    const std::vector<double> br = detail::phase_panels(x, node_budget);
    // Phase values carry an absolute rounding error of about eps·Σ|x_j|, which
    // bounds the attainable absolute accuracy of I however fine the rule.
    double floor = 1.0;
    for (int j = 0; j < x.k(); ++j) floor += std::abs(x.x[j]);
    floor *= std::numeric_limits<double>::epsilon();
    OscillatoryResult best;
    for (int lo_order = 6; lo_order <= 14; lo_order += 4) {
        const int hi_order = lo_order + 2;
        const long need = static_cast<long>(br.size() - 1) * (lo_order + hi_order);
        if (need > node_budget) break;
        const GaussRule& g1 = gauss_legendre(lo_order);
        const GaussRule& g2 = gauss_legendre(hi_order);
        cplx total = 0.0;
        double err = 0.0;
        for (std::size_t p = 0; p + 1 < br.size(); ++p) {
            const double c = 0.5 * (br[p] + br[p + 1]), h = 0.5 * (br[p + 1] - br[p]);
            cplx q1 = 0.0, q2 = 0.0;
            for (std::size_t i = 0; i < g1.size(); ++i) q1 += g1.w[i] * std::polar(1.0, x.value(c + h * g1.x[i]));
            for (std::size_t i = 0; i < g2.size(); ++i) q2 += g2.w[i] * std::polar(1.0, x.value(c + h * g2.x[i]));
            total += h * q2;
            err += h * std::abs(q2 - q1);
        }
        best = {total, std::max(err, floor), need, static_cast<int>(br.size() - 1)};
        if (err <= std::max(tol * std::abs(total), floor)) return best;
    }
    if (best.nodes == 0)
        throw AccuracyError("ack_integral: node budget too small for the phase", 0.0, INFINITY);
    throw AccuracyError("ack_integral: tolerance not reached within the node budget", std::abs(best.value),
                        best.error_bound);
}

/// L^p mass of I over the dyadic shell {2^j <= ‖x‖_∞ < 2^{j+1}}.
struct ShellMass {
    int j = 0;
    double p = 0.0;
    double mass = 0.0;
    double standard_error = 0.0;
    int samples = 0;
};

/// Exact volume of the k-dimensional shell {2^j <= ‖x‖_∞ < 2^{j+1}}.
inline double shell_volume(int k, int j)
{
    return std::pow(std::ldexp(1.0, j + 2), k) - std::pow(std::ldexp(1.0, j + 1), k);
}

/// Stratified sample of one shell: values |I(x)| with their cell weights. The
/// same sample serves every exponent p.
struct ShellSample {
    int k = 2;
    int j = 0;
    /// Per cell: area and |I| at its samples.
    std::vector<double> cell_volume;
    std::vector<std::vector<double>> cell_values;
};

inline constexpr int kShellGrid = 16;
inline constexpr int kDegenerateBoost = 8;

namespace detail {

/// Whether the box [lo, hi] meets a coordinate hyperplane or the set where the
/// stationary point of P_x sits at an end of [0, 1] (x_1 = 0 or P'_x(1) = 0).
inline bool cell_is_degenerate(const Vec& lo, const Vec& hi)
{
    const int k = lo.dim();
    for (int d = 0; d < k; ++d)
        if (lo[d] <= 0.0 && hi[d] >= 0.0) return true;
    // Linear form P'_x(1) = Σ j x_j: check sign change over the box corners.
    double mn = 0.0, mx = 0.0;
    for (int d = 0; d < k; ++d) {
        const double a = (d + 1) * lo[d], b = (d + 1) * hi[d];
        mn += std::min(a, b);
        mx += std::max(a, b);
    }
    return mn <= 0.0 && mx >= 0.0;
}

} // namespace detail

/// Draws and evaluates the stratified sample of shell j. Cells of a 16^k grid
/// over [-2^{j+1}, 2^{j+1}]^k outside the inner box form the strata; cells that
/// touch the degenerate set receive 8x the base allocation.
inline ShellSample sample_shell(int k, int j, int budget, std::uint64_t seed, int threads = 1, double tol = 1e-8)
{
    if (k < 2 || k > 3) throw DomainError("shell sampling supports k = 2 (and best-effort k = 3)");
    if (j < 0 || j > 14) throw DomainError("shell index j must lie in [0, 14]");
    const int G = kShellGrid;
    const double R = std::ldexp(1.0, j + 1), w = 2.0 * R / G;
    std::vector<Vec> lo_corners;
    std::vector<bool> boosted;
    const int cells = k == 2 ? G * G : G * G * G;
    for (int c = 0; c < cells; ++c) {
        Vec lo(k), hi(k);
        int rem = c;
        bool inner = true;
        for (int d = 0; d < k; ++d) {
            const int idx = rem % G;
            rem /= G;
            lo[d] = -R + idx * w;
            hi[d] = lo[d] + w;
            if (!(idx >= G / 4 && idx < 3 * G / 4)) inner = false;
        }
        if (inner) continue;
        lo_corners.push_back(lo);
        Vec h = lo;
        for (int d = 0; d < k; ++d) h[d] += w;
        boosted.push_back(detail::cell_is_degenerate(lo, h));
    }
    long units = 0;
    for (bool b : boosted) units += b ? kDegenerateBoost : 1;
    const int base = std::max(2, static_cast<int>(budget / units));
    ShellSample s;
    s.k = k;
    s.j = j;
    const std::size_t n = lo_corners.size();
    s.cell_volume.assign(n, std::pow(w, k));
    s.cell_values.resize(n);
    parallel_for(n, threads, [&](std::size_t c) {
        const int m = boosted[c] ? base * kDegenerateBoost : base;
        auto rng = stratum_rng(seed, {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(j), c});
        std::vector<double> vals(m);
        for (int i = 0; i < m; ++i) {
            PhaseVector P{Vec(k)};
            for (int d = 0; d < k; ++d) P.x[d] = lo_corners[c][d] + w * uniform01(rng);
            vals[i] = std::abs(ack_integral(P, tol).value);
        }
        s.cell_values[c] = std::move(vals);
    });
    return s;
}

/// Stratified estimate of S_j for exponent p from a shell sample.
inline ShellMass shell_mass_from_sample(const ShellSample& s, double p)
{
    std::vector<double> means(s.cell_values.size()), vars(s.cell_values.size());
    int total = 0;
    for (std::size_t c = 0; c < s.cell_values.size(); ++c) {
        const auto& v = s.cell_values[c];
        const double n = static_cast<double>(v.size());
        double m = 0.0;
        for (double a : v) m += std::pow(a, p);
        m /= n;
        double q = 0.0;
        for (double a : v) q += (std::pow(a, p) - m) * (std::pow(a, p) - m);
        const double var = v.size() > 1 ? q / (n - 1.0) : 0.0;
        means[c] = s.cell_volume[c] * m;
        vars[c] = s.cell_volume[c] * s.cell_volume[c] * var / n;
        total += static_cast<int>(v.size());
    }
    ShellMass r;
    r.j = s.j;
    r.p = p;
    r.mass = pairwise_sum(means);
    r.standard_error = std::sqrt(pairwise_sum(vars));
    r.samples = total;
    return r;
}

/// S_j = ∫_{shell j} |I(x)|^p dx by stratified Monte Carlo.
inline ShellMass shell_mass(int k, double p, int j, int budget, std::uint64_t seed, int threads = 1)
{
    if (!(p >= 2.0 && p <= 8.0)) throw DomainError("shell_mass exponent p must lie in [2, 8]");
    const ShellMass m = shell_mass_from_sample(sample_shell(k, j, budget, seed, threads), p);
    if (m.standard_error > 0.1 * m.mass)
        throw AccuracyError("shell_mass: standard error above 10% of S_j", m.mass, m.standard_error);
    return m;
}

enum class ShellVerdict { Divergent, NearCritical, Convergent };

inline const char* shell_verdict_name(ShellVerdict v)
{
    switch (v) {
    case ShellVerdict::Divergent: return "divergent";
    case ShellVerdict::NearCritical: return "near-critical";
    default: return "convergent";
    }
}

inline ShellVerdict classify_slope(double beta)
{
    if (beta < -0.1) return ShellVerdict::Convergent;
    if (beta > 0.1) return ShellVerdict::Divergent;
    return ShellVerdict::NearCritical;
}

struct ProbeRow {
    double p = 0.0;
    double beta = 0.0;
    double beta_halfwidth = 0.0;
    ShellVerdict verdict = ShellVerdict::NearCritical;
    std::vector<ShellMass> shells;
};

struct ThresholdProbe {
    int k = 2;
    double p_critical = 0.0;
    std::vector<ProbeRow> rows;
    /// Verdicts never move back toward "divergent" as p increases.
    bool ordered = true;
    /// Largest p judged divergent and smallest judged convergent bracket p_c.
    bool brackets_critical = true;
};

/// β(p) = least-squares slope of log₂ S_j against j, for each p over shells
/// j_lo..j_hi sampled once and shared by all exponents.
inline ThresholdProbe threshold_probe(int k, std::vector<double> p_list, int j_lo, int j_hi, int budget,
                                      std::uint64_t seed, int threads = 1)
{
    if (j_hi - j_lo + 1 < 5) throw DomainError("threshold_probe needs at least 5 shells");
    for (double p : p_list)
        if (!(p >= 2.0 && p <= 8.0)) throw DomainError("threshold_probe exponents must lie in [2, 8]");
    std::sort(p_list.begin(), p_list.end());
    std::vector<ShellSample> samples;
    for (int j = j_lo; j <= j_hi; ++j) samples.push_back(sample_shell(k, j, budget, seed, threads));
    ThresholdProbe probe;
    probe.k = k;
    probe.p_critical = critical_exponent(k).to_double();
    for (double p : p_list) {
        ProbeRow row;
        row.p = p;
        std::vector<std::pair<double, double>> pts;
        for (const ShellSample& s : samples) {
            const ShellMass m = shell_mass_from_sample(s, p);
            if (m.standard_error > 0.1 * m.mass)
                throw AccuracyError("threshold_probe: standard error above 10% of S_j at j = " + std::to_string(s.j),
                                    m.mass, m.standard_error);
            row.shells.push_back(m);
            // fit_power_law regresses on log₂ of its first coordinate; 2^{-j}
            // turns that into -j, so β is minus the fitted slope.
            pts.emplace_back(std::ldexp(1.0, -s.j), m.mass);
        }
        const PowerFit f = fit_power_law(pts);
        row.beta = -f.slope;
        row.beta_halfwidth = f.slope_halfwidth;
        row.verdict = classify_slope(row.beta);
        probe.rows.push_back(row);
    }
    for (std::size_t i = 1; i < probe.rows.size(); ++i)
        if (static_cast<int>(probe.rows[i].verdict) < static_cast<int>(probe.rows[i - 1].verdict))
            probe.ordered = false;
    for (const ProbeRow& r : probe.rows) {
        if (r.verdict == ShellVerdict::Divergent && r.p > probe.p_critical) probe.brackets_critical = false;
        if (r.verdict == ShellVerdict::Convergent && r.p < probe.p_critical) probe.brackets_critical = false;
    }
    return probe;
}

} // namespace mcurve
