#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "mcurve/errors.hpp"

namespace mcurve {

/// Gauss–Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
    std::size_t size() const { return x.size(); }
};

namespace detail {

inline GaussRule compute_gauss_legendre(int n)
{
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = z;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        double p0 = 1.0, p1 = z;
        for (int j = 2; j <= n; ++j) {
            const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        r.x[i] = -z;
        r.x[n - 1 - i] = z;
        r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    if (n % 2 == 1) r.x[n / 2] = 0.0;
    return r;
}

} // namespace detail

/// Cached n-point Gauss–Legendre rule; thread-safe, returned reference stays valid.
inline const GaussRule& gauss_legendre(int n)
{
    if (n < 1 || n > 1024) throw DomainError("Gauss-Legendre order out of range");
    static std::mutex mu;
    static std::map<int, std::unique_ptr<GaussRule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<GaussRule>(detail::compute_gauss_legendre(n));
    return *slot;
}

/// Nodes and weights of an n-point rule mapped to [a, b].
struct MappedRule {
    std::vector<double> x;
    std::vector<double> w;
};

inline MappedRule map_rule(const GaussRule& r, double a, double b)
{
    MappedRule m;
    const double h = 0.5 * (b - a), c = 0.5 * (a + b);
    m.x.resize(r.size());
    m.w.resize(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        m.x[i] = c + h * r.x[i];
        m.w[i] = h * r.w[i];
    }
    return m;
}

/// Composite Gauss–Legendre rule with `panels` equal panels of `order` nodes on [a, b].
inline MappedRule composite_rule(double a, double b, int panels, int order)
{
    const GaussRule& g = gauss_legendre(order);
    MappedRule m;
    m.x.reserve(static_cast<std::size_t>(panels) * order);
    m.w.reserve(static_cast<std::size_t>(panels) * order);
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const MappedRule part = map_rule(g, a + p * h, a + (p + 1) * h);
        m.x.insert(m.x.end(), part.x.begin(), part.x.end());
        m.w.insert(m.w.end(), part.w.begin(), part.w.end());
    }
    return m;
}

/// Barycentric weights for Lagrange interpolation through arbitrary distinct nodes.
inline std::vector<double> barycentric_weights(const std::vector<double>& nodes)
{
    const std::size_t n = nodes.size();
    std::vector<double> w(n, 1.0);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i)
            if (i != j) w[j] /= (nodes[j] - nodes[i]);
    return w;
}

/// Lagrange basis values at x through `nodes` (second barycentric form); writes
/// into `out`, which must have nodes.size() entries.
inline void barycentric_basis(const std::vector<double>& nodes, const std::vector<double>& bw,
                              double x, double* out)
{
    const std::size_t n = nodes.size();
    double denom = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double d = x - nodes[j];
        if (d == 0.0) {
            for (std::size_t i = 0; i < n; ++i) out[i] = (i == j) ? 1.0 : 0.0;
            return;
        }
        out[j] = bw[j] / d;
        denom += out[j];
    }
    for (std::size_t j = 0; j < n; ++j) out[j] /= denom;
}

} // namespace mcurve
