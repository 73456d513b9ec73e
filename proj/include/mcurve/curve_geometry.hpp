#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mcurve/errors.hpp"
#include "mcurve/linalg.hpp"

namespace mcurve {

/// Moment curve (t, t², …, t^k) plus an optional small polynomial perturbation.
/// perturbation[j] holds the coefficients (constant term first) added to
/// component j (0-based); missing components are unperturbed.
struct CurveSpec {
    int k = 2;
    std::vector<std::vector<double>> perturbation;

    static constexpr double kMaxDelta = 1e-3;

    static CurveSpec moment(int k) { return CurveSpec{k, {}}; }

    /// Largest absolute perturbation coefficient.
    double delta() const
    {
        double d = 0.0;
        for (const auto& comp : perturbation)
            for (double c : comp) d = std::max(d, std::abs(c));
        return d;
    }

    void validate() const
    {
        if (k < 2) throw DomainError("curve dimension k must be >= 2, got " + std::to_string(k));
        if (k > kMaxDim) throw DomainError("curve dimension k exceeds " + std::to_string(kMaxDim));
        if (static_cast<int>(perturbation.size()) > k)
            throw DomainError("perturbation has more components than k");
        if (!(delta() <= kMaxDelta))
            throw DomainError("perturbation coefficients exceed the small-perturbation bound 1e-3");
    }
};

/// Polynomial curve with its coefficient table expanded; evaluation works for
/// any real t, which the tube constructions use to continue the curve slightly
/// past the ends of [0, 1].
class Curve {
public:
    explicit Curve(const CurveSpec& spec) : k_(spec.k)
    {
        spec.validate();
        degree_ = k_;
        for (const auto& comp : spec.perturbation)
            degree_ = std::max(degree_, static_cast<int>(comp.size()) - 1);
        coef_.assign(static_cast<std::size_t>(k_) * (degree_ + 1), 0.0);
        for (int j = 0; j < k_; ++j) {
            c(j, j + 1) = 1.0;
            if (j < static_cast<int>(spec.perturbation.size()))
                for (std::size_t m = 0; m < spec.perturbation[j].size(); ++m)
                    c(j, static_cast<int>(m)) += spec.perturbation[j][m];
        }
    }

    int k() const { return k_; }
    int degree() const { return degree_; }
    double coefficient(int j, int m) const { return coef_[static_cast<std::size_t>(j) * (degree_ + 1) + m]; }

    /// m-th derivative at t (m = 0 gives the point).
    Vec derivative(double t, int m) const
    {
        Vec v(k_);
        if (m > degree_) return v;
        for (int j = 0; j < k_; ++j) {
            double s = 0.0;
            for (int p = degree_; p >= m; --p) s = s * t + coefficient(j, p) * falling(p, m);
            v[j] = s;
        }
        return v;
    }
    Vec point(double t) const { return derivative(t, 0); }

private:
    double& c(int j, int m) { return coef_[static_cast<std::size_t>(j) * (degree_ + 1) + m]; }
    static double falling(int p, int m)
    {
        double f = 1.0;
        for (int i = 0; i < m; ++i) f *= (p - i);
        return f;
    }

    int k_;
    int degree_;
    std::vector<double> coef_;
};

/// Orthonormal frame M_t = [e_1(t), …, e_k(t)] with the orientation
/// convention <e_m, γ^(m)(t)> > 0.
struct FrenetFrame {
    double t = 0.0;
    Mat M;
    double orthonormality_residual = 0.0; ///< max |MᵀM - I|
};

/// Scale ε and D_ε = diag(ε, ε², …, ε^k).
struct AnisotropicScaling {
    double epsilon = 0.25;
    Vec diag;

    AnisotropicScaling() = default;
    AnisotropicScaling(double eps, int k) : epsilon(eps), diag(k)
    {
        if (!(eps > 0.0 && eps <= 0.25)) throw DomainError("epsilon must lie in (0, 1/4]");
        double p = 1.0;
        for (int j = 0; j < k; ++j) diag[j] = (p *= eps);
    }
    int dim() const { return diag.dim(); }
};

inline void check_parameter(double t)
{
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("curve parameter t must lie in [0, 1]");
}

/// Gram–Schmidt on (γ', …, γ^(k)) at any real t; no domain check.
inline FrenetFrame frenet_frame_at(const Curve& curve, double t)
{
    const int k = curve.k();
    FrenetFrame f;
    f.t = t;
    f.M = Mat(k);
    for (int m = 0; m < k; ++m) {
        Vec v = curve.derivative(t, m + 1);
        // Two passes of modified Gram–Schmidt keep the columns orthogonal to
        // rounding even when the derivative norms differ by orders of magnitude.
        for (int pass = 0; pass < 2; ++pass)
            for (int i = 0; i < m; ++i) {
                const Vec e = f.M.col(i);
                v -= e * e.dot(v);
            }
        const double n = v.norm();
        if (n < 1e-12) throw DegeneracyError("derivative vectors are linearly dependent at t = " + std::to_string(t));
        f.M.set_col(m, v * (1.0 / n));
    }
    f.orthonormality_residual = (f.M.transpose() * f.M).max_abs_diff(Mat::identity(k));
    return f;
}

inline Vec gamma(const CurveSpec& spec, double t)
{
    check_parameter(t);
    return Curve(spec).point(t);
}

inline Vec curve_derivative(const CurveSpec& spec, double t, int m)
{
    check_parameter(t);
    if (m < 1) throw DomainError("derivative order must be >= 1");
    return Curve(spec).derivative(t, m);
}

inline FrenetFrame frenet_frame(const CurveSpec& spec, double t)
{
    check_parameter(t);
    return frenet_frame_at(Curve(spec), t);
}

/// y = D⁻¹ Mᵀ (ξ − center).
inline Vec anisotropic_coords(const FrenetFrame& frame, const AnisotropicScaling& scaling,
                              const Vec& center, const Vec& xi)
{
    if (!(frame.orthonormality_residual <= 1e-9))
        throw DomainError("frame is not orthonormal; transpose is not its inverse");
    Vec y = frame.M.transpose_times(xi - center);
    for (int j = 0; j < y.dim(); ++j) y[j] /= scaling.diag[j];
    return y;
}

/// Closed tube membership |y_j| <= 1; a relative slack of 1e-12 absorbs the
/// rounding of points constructed exactly on the boundary.
inline bool in_tube(const FrenetFrame& frame, const AnisotropicScaling& scaling, const Vec& center,
                    const Vec& xi)
{
    const Vec y = anisotropic_coords(frame, scaling, center, xi);
    for (int j = 0; j < y.dim(); ++j)
        if (std::abs(y[j]) > 1.0 + 1e-12) return false;
    return true;
}

} // namespace mcurve
