#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include <fftw3.h>

#include "mcurve/bump_partition.hpp"
#include "mcurve/errors.hpp"
#include "mcurve/parallel.hpp"
#include "mcurve/quadrature.hpp"
#include "mcurve/random.hpp"
#include "mcurve/rational.hpp"

namespace mcurve {

using cplx = std::complex<double>;

/// f̂(ξ) = ∫ f(x) e^{−2πi x·ξ} dx and ǧ(x) = ∫ g(ξ) e^{+2πi x·ξ} dξ, so that
/// ‖ǧ‖₂ = ‖g‖₂ with no constant.
struct FourierConvention {
    /// e^{+2πi s}; s is reduced mod 1 first so large phases keep their fraction.
    static cplx inverse_kernel(double cycles)
    {
        const double f = cycles - std::round(cycles);
        return {std::cos(2.0 * std::numbers::pi * f), std::sin(2.0 * std::numbers::pi * f)};
    }
    static cplx forward_kernel(double cycles) { return std::conj(inverse_kernel(cycles)); }
};

namespace detail {

/// Complex product without the IEEE infinity recovery of operator*.
inline cplx cmul(cplx a, cplx b)
{
    return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

} // namespace detail

enum class NormKind { L1, L2, Lp };

struct NormMeasurement {
    NormKind kind = NormKind::L2;
    Rational exponent{2};
    double value = 0.0;
    /// Radius of the integration domain on the x side (infinite when the
    /// quadrature runs on the ξ side).
    double truncation = INFINITY;
    long nodes = 0;
    double rel_error = 0.0;

    bool admissible() const { return rel_error <= 0.05; }
    std::string label() const
    {
        if (kind == NormKind::L1) return "L1";
        if (kind == NormKind::L2) return "L2";
        return "L" + exponent.str();
    }
};

// ---------------------------------------------------------------------------
// Single tubes in their own chart.

/// Half-width of the r box around the rescaled curve that contains supp φ̃.
inline constexpr double kProfileHalfWidth = 2.6e-4;
inline constexpr long kAtomNodeBudget = 20'000'000;

/// g_ι(y) = η_ι(γ(t_ι) + M D y) on shear coordinates y = c(σ) + (0, r):
/// σ runs over the part of the rescaled curve inside the χ box (and the end
/// caps of the continued curve), r over [−R, R]^{k−1}. The node layout
/// resolves e^{2πi v·y} for |v_j| <= resolved[j].
class TubeAtom {
public:
    TubeAtom(const TubeCover& cover, int iota, const Vec& resolved = Vec(), long budget = kAtomNodeBudget)
        : cover_(&cover), iota_(iota), k_(cover.k()), resolved_(cover.k())
    {
        if (iota < 0 || iota >= cover.size()) throw DomainError("tube index out of range");
        for (int j = 0; j < std::min(resolved.dim(), k_); ++j) resolved_[j] = std::abs(resolved[j]);
        det_ = 1.0;
        for (int j = 0; j < k_; ++j) det_ *= cover.scaling().diag[j];
        center_ = cover.center_point(iota);
        build_sigma(budget);
        build_r(budget);
        fill();
    }

    const TubeCover& cover() const { return *cover_; }
    int iota() const { return iota_; }
    double det() const { return det_; }
    const Vec& center() const { return center_; }
    const Vec& resolved() const { return resolved_; }
    long nodes() const { return static_cast<long>(sig_.size()) * rows_; }
    int sigma_nodes() const { return static_cast<int>(sig_.size()); }
    int r_nodes() const { return nr_; }
    double sigma_lo() const { return sig_lo_; }
    double sigma_hi() const { return sig_hi_; }

    /// ∫ g_ι dy.
    double integral() const
    {
        std::vector<double> parts(sig_.size());
        for (std::size_t i = 0; i < sig_.size(); ++i)
            parts[i] = wsig_[i] * rw_ * pairwise_sum(&g_[i * rows_], rows_);
        return pairwise_sum(parts);
    }

    /// ∫ g(y) e^{2πi v·y} dy.
    cplx transform(const Vec& v) const
    {
        const int m = k_ - 1;
        std::vector<cplx> er(static_cast<std::size_t>(m) * nr_);
        for (int j = 0; j < m; ++j)
            for (int q = 0; q < nr_; ++q)
                er[static_cast<std::size_t>(j) * nr_ + q] = FourierConvention::inverse_kernel(v[j + 1] * r_[q]);
        std::vector<cplx> row(rows_);
        for (std::size_t idx = 0; idx < rows_; ++idx) {
            cplx e = 1.0;
            std::size_t rem = idx;
            for (int j = m - 1; j >= 0; --j) {
                e = detail::cmul(e, er[static_cast<std::size_t>(j) * nr_ + rem % nr_]);
                rem /= nr_;
            }
            row[idx] = e;
        }
        std::vector<cplx> parts(sig_.size());
        for (std::size_t i = 0; i < sig_.size(); ++i) {
            const double* gi = &g_[i * rows_];
            cplx s = 0.0;
            for (std::size_t idx = 0; idx < rows_; ++idx)
                if (gi[idx] != 0.0) s += gi[idx] * row[idx];
            parts[i] = wsig_[i] * rw_ * s * FourierConvention::inverse_kernel(v.dot(cpts_[i]));
        }
        return pairwise_sum(parts);
    }

    /// Whether the layout resolves the frequency v.
    bool resolves(const Vec& v) const
    {
        for (int j = 0; j < k_; ++j)
            if (std::abs(v[j]) > resolved_[j] * (1.0 + 1e-12)) return false;
        return true;
    }

    /// v = D Mᵀ x.
    Vec dual(const Vec& x) const
    {
        Vec v(k_);
        for (int j = 0; j < k_; ++j)
            v[j] = cover_->frame_column(iota_, j).dot(x) * cover_->scaling().diag[j];
        return v;
    }

private:
    void build_sigma(long budget)
    {
        const TubeCover& c = *cover_;
        const double eps = c.epsilon();
        const double v = c.speed(iota_);
        auto solve = [&](double target) {
            double s = target / v;
            Vec p, d1, d2;
            for (int it = 0; it < 40; ++it) {
                c.rescaled_curve(iota_, s, p, d1, d2);
                const double ds = (p[0] - target) / d1[0];
                s -= ds;
                if (std::abs(ds) < 1e-15 * (1.0 + std::abs(s))) break;
            }
            return s;
        };
        const double outer = 2.0 * kBumpInner;
        const double cap = 3.0 * kTildeInner / v;
        const double ext_lo = (c.extended_lo() - c.center(iota_)) / eps;
        const double ext_hi = (c.extended_hi() - c.center(iota_)) / eps;
        sig_lo_ = std::max(solve(-outer), ext_lo - cap);
        sig_hi_ = std::min(solve(outer), ext_hi + cap);
        // Phase rate bound Σ_j |v_j| max|c_j'| over the σ range.
        double rate = 0.0;
        {
            Vec p, d1, d2;
            std::vector<double> mx(k_, 0.0);
            for (int s = 0; s <= 32; ++s) {
                c.rescaled_curve(iota_, sig_lo_ + (sig_hi_ - sig_lo_) * s / 32.0, p, d1, d2);
                for (int j = 0; j < k_; ++j) mx[j] = std::max(mx[j], std::abs(d1[j]));
            }
            for (int j = 0; j < k_; ++j) rate += resolved_[j] * mx[j] * 1.1;
        }
        std::vector<std::pair<double, double>> segs;
        std::vector<bool> fine;
        double a = sig_lo_;
        const double z_lo = ext_lo + cap, z_hi = ext_hi - cap;
        if (z_lo > a) {
            segs.emplace_back(a, std::min(z_lo, sig_hi_));
            fine.push_back(true);
            a = std::min(z_lo, sig_hi_);
        }
        const double b = std::max(a, std::min(z_hi, sig_hi_));
        if (b > a) {
            segs.emplace_back(a, b);
            fine.push_back(false);
        }
        if (sig_hi_ > b) {
            segs.emplace_back(b, sig_hi_);
            fine.push_back(true);
        }
        const double full = 2.0 * outer / v;
        for (std::size_t s = 0; s < segs.size(); ++s) {
            const double len = segs[s].second - segs[s].first;
            const int base = fine[s] ? 12 : std::max(2, static_cast<int>(std::ceil(12.0 * len / full)));
            const double want = std::max<double>(base, std::ceil(4.0 * rate * len));
            if (want * kAtomOrder > static_cast<double>(budget))
                throw AccuracyError("tube atom needs more sigma nodes than the budget allows", 0.0, INFINITY);
            const MappedRule r = composite_rule(segs[s].first, segs[s].second, static_cast<int>(want), kAtomOrder);
            sig_.insert(sig_.end(), r.x.begin(), r.x.end());
            wsig_.insert(wsig_.end(), r.w.begin(), r.w.end());
        }
        cpts_.resize(sig_.size());
        Vec p, d1, d2;
        for (std::size_t i = 0; i < sig_.size(); ++i) {
            c.rescaled_curve(iota_, sig_[i], p, d1, d2);
            cpts_[i] = p;
            wsig_[i] *= d1[0];
        }
    }

    void build_r(long budget)
    {
        double f = 0.0;
        for (int j = 1; j < k_; ++j) f = std::max(f, resolved_[j]);
        const int base = k_ == 2 ? 65 : 25;
        nr_ = std::max(base, static_cast<int>(std::ceil(2.0 * kProfileHalfWidth * 4.0 * f)) + 1);
        if (nr_ % 2 == 0) ++nr_;
        rows_ = 1;
        for (int j = 1; j < k_; ++j) rows_ *= nr_;
        if (static_cast<double>(rows_) * static_cast<double>(sig_.size()) > static_cast<double>(budget))
            throw AccuracyError("tube atom needs more r nodes than the budget allows", 0.0, INFINITY);
        const double h = 2.0 * kProfileHalfWidth / (nr_ - 1);
        r_.resize(nr_);
        for (int q = 0; q < nr_; ++q) r_[q] = -kProfileHalfWidth + q * h;
        rw_ = std::pow(h, k_ - 1);
    }

    void fill()
    {
        const TubeCover& c = *cover_;
        g_.assign(sig_.size() * rows_, 0.0);
        const int m = k_ - 1;
        for (std::size_t i = 0; i < sig_.size(); ++i) {
            const double hint = c.center(iota_) + c.epsilon() * sig_[i];
            for (std::size_t idx = 0; idx < rows_; ++idx) {
                Vec y = cpts_[i];
                std::size_t rem = idx;
                for (int j = m - 1; j >= 0; --j) {
                    y[j + 1] += r_[rem % nr_];
                    rem /= nr_;
                }
                g_[i * rows_ + idx] = c.eta(iota_, c.from_coords(iota_, y), hint);
            }
        }
    }

    static constexpr int kAtomOrder = 8;

    const TubeCover* cover_;
    int iota_;
    int k_;
    Vec resolved_;
    double det_ = 1.0;
    Vec center_;
    double sig_lo_ = 0.0, sig_hi_ = 0.0;
    std::vector<double> sig_, wsig_;
    std::vector<Vec> cpts_;
    int nr_ = 0;
    std::size_t rows_ = 1;
    std::vector<double> r_;
    double rw_ = 1.0;
    std::vector<double> g_;
};

/// η̌_ι(x) = det D · e^{2πi x·γ(t_ι)} · ∫ g_ι(y) e^{2πi (D Mᵀx)·y} dy. A finer
/// layout is built on the fly when the atom does not resolve x.
inline cplx inverse_ft_tube(const TubeAtom& atom, const Vec& x, long budget = kAtomNodeBudget)
{
    const Vec v = atom.dual(x);
    const cplx carrier = atom.det() * FourierConvention::inverse_kernel(x.dot(atom.center()));
    if (atom.resolves(v)) return carrier * atom.transform(v);
    const TubeAtom fine(atom.cover(), atom.iota(), v, budget);
    return carrier * fine.transform(v);
}

/// Per-tube values η̌_ι(x_n) for all ι and n; row ι holds the values at every
/// x. Each atom is built once with a layout resolving all the x.
inline std::vector<std::vector<cplx>> inverse_ft_tubes(const TubeCover& cover, const std::vector<Vec>& xs,
                                                       int threads = 1)
{
    std::vector<std::vector<cplx>> out(cover.size());
    parallel_for(static_cast<std::size_t>(cover.size()), threads, [&](std::size_t i) {
        const int iota = static_cast<int>(i);
        Vec need(cover.k());
        for (const Vec& x : xs)
            for (int j = 0; j < cover.k(); ++j)
                need[j] = std::max(need[j], std::abs(cover.frame_column(iota, j).dot(x)) * cover.scaling().diag[j]);
        const TubeAtom atom(cover, iota, need);
        out[i].reserve(xs.size());
        for (const Vec& x : xs) out[i].push_back(inverse_ft_tube(atom, x));
    });
    return out;
}

/// η̌_{Γ_ε}(x_n), each summed pairwise over ι in index order.
inline std::vector<cplx> inverse_ft_total(const TubeCover& cover, const std::vector<Vec>& xs, int threads = 1)
{
    const auto per = inverse_ft_tubes(cover, xs, threads);
    std::vector<cplx> out(xs.size());
    std::vector<cplx> col(per.size());
    for (std::size_t n = 0; n < xs.size(); ++n) {
        for (std::size_t i = 0; i < per.size(); ++i) col[i] = per[i][n];
        out[n] = pairwise_sum(col);
    }
    return out;
}

inline cplx inverse_ft_total(const TubeCover& cover, const Vec& x, int threads = 1)
{
    return inverse_ft_total(cover, std::vector<Vec>{x}, threads)[0];
}

// ---------------------------------------------------------------------------
// Global (t, r) chart of the whole fattened curve.

struct ProfileOptions {
    int interior_panels = 32;
    int cap_panels = 12;
    int order = 8;
    /// Nodes per r axis (odd); 0 selects 161 for k = 2 and 41 otherwise. The
    /// k = 2 grid keeps the r sum free of aliasing up to normal frequencies
    /// of 1e5 cycles per unit r, where the profile transform has decayed to
    /// 2e-6 of its peak.
    int r_nodes = 0;
    int threads = 1;
};

/// η_{Γ_ε} tabulated on ξ(t, r) = γ(t) + Σ_{j>=2} ε^j r_j e_j(t), with
/// composite Gauss–Legendre panels in t (dense over the two end caps) and a
/// uniform grid in r ∈ [−R, R]^{k−1}.
class ProfileTable {
public:
    explicit ProfileTable(const TubeCover& cover, ProfileOptions opt = {})
        : cover_(&cover), k_(cover.k()), order_(opt.order)
    {
        const Curve& cv = cover.curve();
        const double eps = cover.epsilon();
        const double v0 = cv.derivative(cover.extended_lo(), 1).norm();
        const double v1 = cv.derivative(cover.extended_hi(), 1).norm();
        const double cap0 = 3.0 * kTildeInner * eps / v0, cap1 = 3.0 * kTildeInner * eps / v1;
        T0_ = cover.extended_lo() - cap0;
        T1_ = cover.extended_hi() + cap1;
        auto add = [&](double a, double b, int panels) {
            for (int p = 0; p < panels; ++p) breaks_.push_back(a + (b - a) * p / panels);
        };
        add(T0_, cover.extended_lo() + cap0, opt.cap_panels);
        add(cover.extended_lo() + cap0, cover.extended_hi() - cap1, opt.interior_panels);
        add(cover.extended_hi() - cap1, T1_, opt.cap_panels);
        breaks_.push_back(T1_);
        const GaussRule& g = gauss_legendre(order_);
        ref_nodes_ = g.x;
        ref_bw_ = barycentric_weights(ref_nodes_);
        for (std::size_t p = 0; p + 1 < breaks_.size(); ++p) {
            const MappedRule m = map_rule(g, breaks_[p], breaks_[p + 1]);
            t_.insert(t_.end(), m.x.begin(), m.x.end());
            wt_.insert(wt_.end(), m.w.begin(), m.w.end());
        }
        nr_ = opt.r_nodes > 0 ? opt.r_nodes : (k_ == 2 ? 161 : 41);
        if (nr_ % 2 == 0) ++nr_;
        h_ = 2.0 * kProfileHalfWidth / (nr_ - 1);
        rows_ = 1;
        for (int j = 1; j < k_; ++j) rows_ *= nr_;
        r_first_.resize(rows_);
        for (std::size_t idx = 0; idx < rows_; ++idx) {
            double r[kMaxDim];
            r_of(idx, r);
            r_first_[idx] = r[0];
        }
        eta_.assign(t_.size() * rows_, 0.0);
        parallel_for(t_.size(), opt.threads, [&](std::size_t i) {
            const Geometry geo = geometry(t_[i]);
            for (std::size_t idx = 0; idx < rows_; ++idx)
                eta_[i * rows_ + idx] = cover_->eta_total(point(geo, idx), t_[i]);
        });
    }

    struct Geometry {
        double t = 0.0;
        Vec gamma;
        double speed = 0.0;
        /// e_2·γ'' / |γ'|.
        double bend = 0.0;
        Mat frame;
    };

    Geometry geometry(double t) const
    {
        const Curve& cv = cover_->curve();
        Geometry g;
        g.t = t;
        g.gamma = cv.point(t);
        const Vec d1 = cv.derivative(t, 1);
        g.speed = d1.norm();
        g.frame = frenet_frame_at(cv, t).M;
        g.bend = g.frame.col(1).dot(cv.derivative(t, 2)) / g.speed;
        return g;
    }

    const TubeCover& cover() const { return *cover_; }
    int k() const { return k_; }
    double t_lo() const { return T0_; }
    double t_hi() const { return T1_; }
    std::size_t t_count() const { return t_.size(); }
    double t_node(std::size_t i) const { return t_[i]; }
    double t_weight(std::size_t i) const { return wt_[i]; }
    int r_count() const { return nr_; }
    std::size_t rows() const { return rows_; }
    double r_step() const { return h_; }
    double r_node(int q) const { return -kProfileHalfWidth + q * h_; }
    const double* row(std::size_t i) const { return &eta_[i * rows_]; }
    const std::vector<double>& breaks() const { return breaks_; }
    long nodes() const { return static_cast<long>(t_.size() * rows_); }

    /// r_2 of the multi-index idx.
    double r_first(std::size_t idx) const { return r_first_[idx]; }

    /// Components r_2..r_k of the multi-index idx.
    void r_of(std::size_t idx, double* r) const
    {
        for (int j = k_ - 2; j >= 0; --j) {
            r[j] = r_node(static_cast<int>(idx % nr_));
            idx /= nr_;
        }
    }

    Vec point(const Geometry& geo, std::size_t idx) const
    {
        double r[kMaxDim];
        r_of(idx, r);
        Vec xi = geo.gamma;
        for (int j = 1; j < k_; ++j) xi += geo.frame.col(j) * (cover_->scaling().diag[j] * r[j - 1]);
        return xi;
    }

    /// dξ = J dt dr with J = Π_{j>=2} ε^j · (|γ'| − ε² r_2 e_2·γ''/|γ'|).
    double jacobian(const Geometry& geo, double r2) const
    {
        double s = 1.0;
        for (int j = 1; j < k_; ++j) s *= cover_->scaling().diag[j];
        return s * (geo.speed - cover_->scaling().diag[1] * r2 * geo.bend);
    }

    /// η at every r node for parameter t, interpolated within the t panel.
    void interpolate(double t, double* out) const
    {
        if (!(t > T0_ && t < T1_)) {
            std::fill(out, out + rows_, 0.0);
            return;
        }
        const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
        const std::size_t p = std::min<std::size_t>(static_cast<std::size_t>(it - breaks_.begin()) - 1,
                                                    breaks_.size() - 2);
        const double a = breaks_[p], b = breaks_[p + 1];
        double basis[64];
        barycentric_basis(ref_nodes_, ref_bw_, (2.0 * t - a - b) / (b - a), basis);
        std::fill(out, out + rows_, 0.0);
        for (int l = 0; l < order_; ++l) {
            const double* src = row(p * order_ + l);
            for (std::size_t idx = 0; idx < rows_; ++idx) out[idx] += basis[l] * src[idx];
        }
    }

    /// Σ_i w_i Σ_r h^{k−1} J η^power over the grid restricted to every
    /// `stride`-th r node per axis (stride 2 is the coarse comparison grid).
    double integrate(int power, int stride = 1) const
    {
        std::vector<double> parts(t_.size());
        const double hw = std::pow(h_ * stride, k_ - 1);
        for (std::size_t i = 0; i < t_.size(); ++i) {
            const Geometry geo = geometry(t_[i]);
            double s = 0.0;
            double r[kMaxDim];
            for (std::size_t idx = 0; idx < rows_; ++idx) {
                if (stride > 1) {
                    std::size_t rem = idx;
                    bool keep = true;
                    for (int j = 0; j < k_ - 1; ++j) {
                        keep = keep && (rem % nr_) % stride == 0;
                        rem /= nr_;
                    }
                    if (!keep) continue;
                }
                const double e = eta_[i * rows_ + idx];
                if (e == 0.0) continue;
                r_of(idx, r);
                s += jacobian(geo, r[0]) * (power == 1 ? e : std::pow(e, power));
            }
            parts[i] = wt_[i] * hw * s;
        }
        return pairwise_sum(parts);
    }

    /// Per-panel Legendre tail |a_{n−2}| + |a_{n−1}| of the r-integrated
    /// integrand, summed over panels: an estimate of the t-quadrature error.
    double t_error(int power) const
    {
        std::vector<double> f(t_.size());
        for (std::size_t i = 0; i < t_.size(); ++i) {
            const Geometry geo = geometry(t_[i]);
            double s = 0.0, r[kMaxDim];
            for (std::size_t idx = 0; idx < rows_; ++idx) {
                const double e = eta_[i * rows_ + idx];
                if (e == 0.0) continue;
                r_of(idx, r);
                s += jacobian(geo, r[0]) * std::pow(e, power);
            }
            f[i] = s * std::pow(h_, k_ - 1);
        }
        const GaussRule& g = gauss_legendre(order_);
        double err = 0.0;
        for (std::size_t p = 0; p + 1 < breaks_.size(); ++p) {
            const double half = 0.5 * (breaks_[p + 1] - breaks_[p]);
            for (int n = order_ - 2; n < order_; ++n) {
                double a = 0.0;
                for (int l = 0; l < order_; ++l) a += g.w[l] * f[p * order_ + l] * legendre(n, g.x[l]);
                err += half * std::abs(a);
            }
        }
        return err;
    }

private:
    static double legendre(int n, double x)
    {
        double p0 = 1.0, p1 = x;
        if (n == 0) return 1.0;
        for (int j = 2; j <= n; ++j) {
            const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
            p0 = p1;
            p1 = p2;
        }
        return p1;
    }

    const TubeCover* cover_;
    int k_;
    int order_;
    double T0_ = 0.0, T1_ = 1.0;
    std::vector<double> breaks_, ref_nodes_, ref_bw_, t_, wt_;
    int nr_ = 0;
    double h_ = 0.0;
    std::size_t rows_ = 1;
    std::vector<double> r_first_, eta_;
};

/// ‖η‖₂ (= ‖η̌‖₂) from the global table. The error estimate adds the change
/// under r-grid coarsening and the Legendre tail of the t panels.
inline NormMeasurement l2_norm_eta(const ProfileTable& table)
{
    const double s = table.integrate(2);
    const double coarse = table.integrate(2, 2);
    const double err = std::abs(s - coarse) + table.t_error(2);
    NormMeasurement m;
    m.kind = NormKind::L2;
    m.exponent = Rational(2);
    m.value = std::sqrt(s);
    m.rel_error = 0.5 * err / s;
    m.nodes = table.nodes();
    if (!m.admissible())
        throw AccuracyError("L2 quadrature error estimate above 5%", m.value, m.rel_error * m.value);
    return m;
}

inline NormMeasurement l2_norm_eta(const TubeCover& cover, int threads = 1)
{
    ProfileOptions o;
    o.threads = threads;
    return l2_norm_eta(ProfileTable(cover, o));
}

// ---------------------------------------------------------------------------
// η̌_{Γ_ε}(x) from the global table, restricted to windows in t.

struct WindowOptions {
    /// Phase cycles across each window taper.
    double taper_cycles = 24.0;
    /// Phase advance per Gauss–Legendre panel.
    double panel_cycles = 0.5;
    int order = 8;
    long budget = 4'000'000;
};

struct TransformValue {
    cplx value;
    long nodes = 0;
};

/// Evaluates η̌_{Γ_ε}(x) = ∫ dt e^{2πi x·γ(t)} ∫ dr J η e^{2πi Σ_j ε^j r_j x·e_j(t)}
/// with the t integral restricted to smooth windows around the stationary
/// points of x·γ(t) and around the end caps. Outside the windows the
/// integrand is smooth on scales much longer than one phase cycle and its
/// contribution is below the table accuracy.
class GlobalTransform {
public:
    explicit GlobalTransform(const ProfileTable& table, WindowOptions opt = {}) : table_(&table), opt_(opt)
    {
        const Curve& cv = table.cover().curve();
        const double eps = table.cover().epsilon();
        for (int s = 0; s <= 64; ++s) {
            const double t = table.t_lo() + (table.t_hi() - table.t_lo()) * s / 64.0;
            curvature_bound_ = std::max(curvature_bound_, cv.derivative(t, 2).norm());
        }
        curvature_bound_ *= 1.1;
        v0_ = cv.derivative(table.cover().extended_lo(), 1).norm();
        v1_ = cv.derivative(table.cover().extended_hi(), 1).norm();
        cap_lo_ = table.cover().extended_lo() + 3.0 * kTildeInner * eps / v0_;
        cap_hi_ = table.cover().extended_hi() - 3.0 * kTildeInner * eps / v1_;
    }

    const ProfileTable& table() const { return *table_; }

    TransformValue operator()(const Vec& x) const
    {
        const ProfileTable& tab = *table_;
        const Curve& cv = tab.cover().curve();
        const double T0 = tab.t_lo(), T1 = tab.t_hi();
        const double eps = tab.cover().epsilon();
        const double M = opt_.taper_cycles;
        auto dphi = [&](double t) { return x.dot(cv.derivative(t, 1)); };
        auto d2phi = [&](double t) { return x.dot(cv.derivative(t, 2)); };

        std::vector<Window> wins;
        for (double ts : stationary(x)) {
            const double a = std::abs(d2phi(ts));
            const double d = a > 0.0 ? std::sqrt(M / (1.5 * a)) : (T1 - T0);
            wins.push_back({ts - 2.0 * d, ts - d, ts + d, ts + 2.0 * d});
        }
        const double cap_scale0 = kTildeInner * eps / v0_, cap_scale1 = kTildeInner * eps / v1_;
        if (std::abs(dphi(tab.cover().extended_lo())) * cap_scale0 <= kCapCycles) {
            const double tau = cycles_span(std::abs(dphi(cap_lo_)), std::abs(d2phi(cap_lo_)), M);
            wins.push_back({T0 - 1.0, T0, cap_lo_, cap_lo_ + tau});
        }
        if (std::abs(dphi(tab.cover().extended_hi())) * cap_scale1 <= kCapCycles) {
            const double tau = cycles_span(std::abs(dphi(cap_hi_)), std::abs(d2phi(cap_hi_)), M);
            wins.push_back({cap_hi_ - tau, cap_hi_, T1, T1 + 1.0});
        }
        TransformValue out{0.0, 0};
        if (wins.empty()) return out;

        std::vector<std::pair<double, double>> spans;
        for (const Window& w : wins) {
            const double a = std::max(w.a, T0), b = std::min(w.b, T1);
            if (b > a) spans.emplace_back(a, b);
        }
        std::sort(spans.begin(), spans.end());
        std::vector<std::pair<double, double>> merged;
        for (const auto& sp : spans)
            if (!merged.empty() && sp.first <= merged.back().second)
                merged.back().second = std::max(merged.back().second, sp.second);
            else
                merged.push_back(sp);

        const double m2 = x.norm() * curvature_bound_;
        const double pc = opt_.panel_cycles;
        std::vector<double> edges;
        for (const auto& [a, b] : merged) {
            // Panel edges: phase-bounded steps, forced to stop at table breaks.
            auto br = std::upper_bound(tab.breaks().begin(), tab.breaks().end(), a);
            double t = a;
            edges.push_back(t);
            while (t < b) {
                const double g1 = std::abs(dphi(t));
                double h = m2 > 0.0 ? (-g1 + std::sqrt(g1 * g1 + 2.0 * m2 * pc)) / m2 : pc / std::max(g1, 1e-300);
                if (!(h > 0.0)) h = b - t;
                double next = std::min(b, t + h);
                while (br != tab.breaks().end() && *br <= t) ++br;
                if (br != tab.breaks().end() && *br < next) next = *br;
                t = next;
                edges.push_back(t);
                if (static_cast<long>(edges.size()) * opt_.order > opt_.budget)
                    throw AccuracyError("windowed transform exceeds its node budget", 0.0, INFINITY);
            }
            edges.push_back(NAN);
        }

        const GaussRule& g = gauss_legendre(opt_.order);
        const int k = tab.k();
        const int nr = tab.r_count();
        const std::size_t rows = tab.rows();
        std::vector<double> F(rows);
        std::vector<cplx> er(static_cast<std::size_t>(k - 1) * nr);
        std::vector<cplx> parts;
        for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
            if (std::isnan(edges[e]) || std::isnan(edges[e + 1])) continue;
            const MappedRule mr = map_rule(g, edges[e], edges[e + 1]);
            cplx panel = 0.0;
            for (std::size_t l = 0; l < mr.x.size(); ++l) {
                const double t = mr.x[l];
                double keep = 1.0;
                for (const Window& w : wins) keep *= 1.0 - w.weight(t);
                const double W = 1.0 - keep;
                if (W == 0.0) continue;
                tab.interpolate(t, F.data());
                const ProfileTable::Geometry geo = tab.geometry(t);
                for (int j = 1; j < k; ++j) {
                    const double om = x.dot(geo.frame.col(j)) * tab.cover().scaling().diag[j];
                    const cplx step = FourierConvention::inverse_kernel(om * tab.r_step());
                    cplx cur = FourierConvention::inverse_kernel(om * tab.r_node(0));
                    for (int q = 0; q < nr; ++q) {
                        er[static_cast<std::size_t>(j - 1) * nr + q] = cur;
                        cur = detail::cmul(cur, step);
                    }
                }
                const double j0 = tab.jacobian(geo, 0.0), j1 = tab.jacobian(geo, 1.0) - j0;
                cplx s = 0.0;
                for (std::size_t idx = 0; idx < rows; ++idx) {
                    if (F[idx] == 0.0) continue;
                    cplx ph = er[static_cast<std::size_t>(k - 2) * nr + idx % nr];
                    std::size_t rem = idx / nr;
                    for (int j = k - 3; j >= 0; --j) {
                        ph = detail::cmul(ph, er[static_cast<std::size_t>(j) * nr + rem % nr]);
                        rem /= nr;
                    }
                    s += (j0 + j1 * tab.r_first(idx)) * F[idx] * ph;
                }
                panel += mr.w[l] * W * s * FourierConvention::inverse_kernel(x.dot(geo.gamma));
                ++out.nodes;
            }
            parts.push_back(panel * std::pow(tab.r_step(), k - 1));
        }
        out.value = pairwise_sum(parts);
        return out;
    }

private:
    /// Length over which a phase with |φ'| = g and |φ''| <= a advances by at
    /// least `cycles`.
    static double cycles_span(double g, double a, double cycles)
    {
        if (a <= 0.0) return cycles / std::max(g, 1e-300);
        return (-g + std::sqrt(g * g + 2.0 * a * cycles)) / a;
    }

    /// Window equal to 1 on [c, d] with smooth tapers over [a, c] and [d, b].
    struct Window {
        double a, c, d, b;
        double weight(double t) const
        {
            if (t <= a || t >= b) return 0.0;
            if (t < c) return smooth_step((t - a) / (c - a));
            if (t > d) return smooth_step((b - t) / (b - d));
            return 1.0;
        }
    };

    /// Zeros of x·γ'(t) in [T0, T1].
    std::vector<double> stationary(const Vec& x) const
    {
        const Curve& cv = table_->cover().curve();
        const double T0 = table_->t_lo(), T1 = table_->t_hi();
        auto f = [&](double t) { return x.dot(cv.derivative(t, 1)); };
        std::vector<double> roots;
        const int n = 16 * cv.degree();
        double a = T0, fa = f(a);
        for (int i = 1; i <= n; ++i) {
            const double b = T0 + (T1 - T0) * i / n, fb = f(b);
            if (fa == 0.0) roots.push_back(a);
            else if (fa * fb < 0.0) {
                double lo = a, hi = b, flo = fa;
                for (int it = 0; it < 200 && hi - lo > 1e-16 * (1.0 + std::abs(lo)); ++it) {
                    const double mid = 0.5 * (lo + hi), fm = f(mid);
                    if ((fm < 0.0) == (flo < 0.0)) {
                        lo = mid;
                        flo = fm;
                    } else
                        hi = mid;
                }
                roots.push_back(0.5 * (lo + hi));
            }
            a = b;
            fa = fb;
        }
        if (fa == 0.0) roots.push_back(T1);
        return roots;
    }

    static constexpr double kCapCycles = 30.0;

    const ProfileTable* table_;
    WindowOptions opt_;
    double curvature_bound_ = 0.0;
    double v0_ = 1.0, v1_ = 1.0;
    double cap_lo_ = 0.0, cap_hi_ = 1.0;
};

// ---------------------------------------------------------------------------
// ‖η̌_{Γ_ε}‖_{p'} by stratified Monte Carlo in the plane (k = 2).

/// Normal frequency (cycles per unit r) beyond which the profile transform
/// carries a fraction below 1e-4 of any ‖η̌‖_{p'}^{p'} with p' >= 1.
inline constexpr double kNormalBand = 1.2e5;

struct LpOptions {
    std::vector<Rational> exponents{Rational(3, 2)};
    /// Exponent driving the sample allocation; 0 selects the first exponent.
    Rational allocation{0};
    /// Total number of transform evaluations.
    int budget = 6000;
    int pilot = 4;
    int angular = 16;
    /// Radius beyond which η̌ is negligible; 0 selects kNormalBand/ε².
    double radius = 0.0;
    std::uint64_t seed = 1;
    int threads = 1;
};

/// Strata: the unit disk and dyadic annuli 2^a <= |x| < 2^{a+1} up to the
/// radius, each cut into equal angular sectors. A pilot pass fixes a
/// per-stratum allocation proportional to volume × RMS of |η̌|^{q}, q the
/// allocation exponent; every exponent is then estimated from the same samples.
inline std::vector<NormMeasurement> lp_norms_total(const ProfileTable& table, const LpOptions& opt)
{
    if (table.k() != 2) throw DomainError("L^p' norms of the total transform are implemented for k = 2 only");
    if (opt.exponents.empty()) throw DomainError("no exponent requested");
    for (const Rational& q : opt.exponents)
        if (q < Rational(1) || q > Rational(2)) throw DomainError("p' must lie in [1, 2]");
    const double eps = table.cover().epsilon();
    const double radius = opt.radius > 0.0 ? opt.radius : kNormalBand / (eps * eps);
    const int shells = static_cast<int>(std::ceil(std::log2(radius)));
    const int nth = opt.angular;
    const int strata = (shells + 1) * nth;
    if (opt.budget < strata * opt.pilot) throw DomainError("Monte Carlo budget below the pilot size");
    const GlobalTransform tf(table);
    const double sector = 2.0 * std::numbers::pi / nth;
    auto radii = [&](int h) {
        const int a = h / nth;
        return a == 0 ? std::pair{0.0, 1.0} : std::pair{std::ldexp(1.0, a - 1), std::ldexp(1.0, a)};
    };
    auto volume = [&](int h) {
        const auto [lo, hi] = radii(h);
        return 0.5 * sector * (hi * hi - lo * lo);
    };
    auto draw = [&](int h, int n) {
        auto rng = stratum_rng(opt.seed, {0x4c70ull, static_cast<std::uint64_t>(h), static_cast<std::uint64_t>(n)});
        const auto [lo, hi] = radii(h);
        const double rho = std::sqrt(lo * lo + uniform01(rng) * (hi * hi - lo * lo));
        const double th = sector * ((h % nth) + uniform01(rng));
        return Vec{rho * std::cos(th), rho * std::sin(th)};
    };
    std::vector<std::vector<double>> mag(strata);
    std::vector<long> nodes(strata, 0);
    auto run = [&](int from_each, const std::vector<int>& counts) {
        std::vector<std::pair<int, int>> jobs;
        for (int h = 0; h < strata; ++h)
            for (int n = static_cast<int>(mag[h].size()); n < (from_each > 0 ? from_each : counts[h]); ++n)
                jobs.emplace_back(h, n);
        std::vector<double> val(jobs.size());
        std::vector<long> cnt(jobs.size());
        parallel_for(jobs.size(), opt.threads, [&](std::size_t i) {
            const TransformValue v = tf(draw(jobs[i].first, jobs[i].second));
            val[i] = std::abs(v.value);
            cnt[i] = v.nodes;
        });
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            mag[jobs[i].first].push_back(val[i]);
            nodes[jobs[i].first] += cnt[i];
        }
    };
    run(opt.pilot, {});
    const double q0 = (opt.allocation == Rational(0) ? opt.exponents.front() : opt.allocation).to_double();
    std::vector<double> score(strata);
    for (int h = 0; h < strata; ++h) {
        double s2 = 0.0;
        for (double m : mag[h]) s2 += std::pow(m, 2.0 * q0);
        score[h] = volume(h) * std::sqrt(s2 / mag[h].size());
    }
    const double total_score = pairwise_sum(score);
    std::vector<int> counts(strata, opt.pilot);
    const int extra = opt.budget - strata * opt.pilot;
    if (total_score > 0.0)
        for (int h = 0; h < strata; ++h)
            counts[h] += static_cast<int>(std::floor(extra * score[h] / total_score));
    run(0, counts);

    std::vector<NormMeasurement> out;
    long total_nodes = 0;
    for (long n : nodes) total_nodes += n;
    for (const Rational& q : opt.exponents) {
        const double qd = q.to_double();
        std::vector<double> mean(strata), var(strata);
        for (int h = 0; h < strata; ++h) {
            std::vector<double> f;
            for (double m : mag[h]) f.push_back(std::pow(m, qd));
            const double n = static_cast<double>(f.size());
            const double mu = pairwise_sum(f) / n;
            double ss = 0.0;
            for (double v : f) ss += (v - mu) * (v - mu);
            mean[h] = volume(h) * mu;
            var[h] = volume(h) * volume(h) * ss / (n - 1.0) / n;
        }
        const double I = pairwise_sum(mean);
        const double se = std::sqrt(pairwise_sum(var));
        NormMeasurement m;
        m.kind = q == Rational(2) ? NormKind::L2 : (q == Rational(1) ? NormKind::L1 : NormKind::Lp);
        m.exponent = q;
        m.value = std::pow(I, 1.0 / qd);
        m.rel_error = I > 0.0 ? se / I / qd : INFINITY;
        m.truncation = radius;
        m.nodes = total_nodes;
        out.push_back(m);
    }
    return out;
}

inline NormMeasurement lp_norm_total(const ProfileTable& table, const Rational& p_prime, int budget,
                                     std::uint64_t seed = 1, int threads = 1)
{
    LpOptions o;
    o.exponents = {p_prime};
    o.budget = budget;
    o.seed = seed;
    o.threads = threads;
    NormMeasurement m = lp_norms_total(table, o).front();
    if (!m.admissible())
        throw AccuracyError("Monte Carlo standard error above 5% at budget", m.value, m.rel_error * m.value);
    return m;
}

// ---------------------------------------------------------------------------
// Per-tube L¹ norms ∫|η̌_ι| dx = ∫|ĝ_ι(u)| du (det D cancels), k = 2.

namespace detail {

inline std::mutex& fftw_planner_mutex()
{
    static std::mutex mu;
    return mu;
}

/// (1/(n1 n2)) Σ|DFT(a)| of an n1 × n2 row-major array, computed in place.
inline double dft_abs_mean(std::vector<cplx>& a, int n1, int n2)
{
    auto* data = reinterpret_cast<fftw_complex*>(a.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        plan = fftw_plan_dft_2d(n1, n2, data, data, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    std::vector<double> rows(n1);
    for (int i = 0; i < n1; ++i) {
        double s = 0.0;
        for (int j = 0; j < n2; ++j) s += std::abs(a[static_cast<std::size_t>(i) * n2 + j]);
        rows[i] = s;
    }
    return pairwise_sum(rows) / (static_cast<double>(n1) * n2);
}

inline int next_pow2(double n)
{
    int p = 1;
    while (p < n) p *= 2;
    return p;
}

} // namespace detail

struct L1Options {
    /// Frequency extent (cycles per unit y) resolved along y_2.
    double band_normal = 6e4;
    /// Along y_1 for interior tubes; end tubes use band_normal on both axes.
    double band_tangent = 2e3;
    int padding = 2;
};

/// ∫|ĝ_ι| du from g_ι sampled on a uniform grid over its support, padded and
/// transformed with FFTW; the Riemann sum of |ĝ| on the DFT lattice is
/// (1/N) Σ|DFT|. The error estimate is half the gap to the same sum on the
/// lattice shifted by half a cell, plus the mass in the outer quarter band.
inline NormMeasurement l1_norm_tube_at(const TubeCover& cover, int iota, const L1Options& opt)
{
    if (cover.k() != 2) throw DomainError("per-tube L1 norms are implemented for k = 2 only");
    const TubeAtom atom(cover, iota);
    const double eps = cover.epsilon();
    const double v = cover.speed(iota);
    const double cap = 3.0 * kTildeInner / v;
    const bool end = (cover.extended_lo() - cover.center(iota)) / eps + cap > atom.sigma_lo() ||
                     (cover.extended_hi() - cover.center(iota)) / eps - cap < atom.sigma_hi();
    Vec c, d1, d2;
    double y1a = INFINITY, y1b = -INFINITY, y2a = INFINITY, y2b = -INFINITY, slope = 0.0;
    for (int s = 0; s <= 256; ++s) {
        cover.rescaled_curve(iota, atom.sigma_lo() + (atom.sigma_hi() - atom.sigma_lo()) * s / 256.0, c, d1, d2);
        y1a = std::min(y1a, c[0]);
        y1b = std::max(y1b, c[0]);
        y2a = std::min(y2a, c[1]);
        y2b = std::max(y2b, c[1]);
        slope = std::max(slope, std::abs(d1[1] / d1[0]));
    }
    y1a -= kProfileHalfWidth;
    y1b += kProfileHalfWidth;
    y2a -= kProfileHalfWidth;
    y2b += kProfileHalfWidth;
    const double U2 = opt.band_normal;
    const double U1 = end ? opt.band_normal : opt.band_tangent + slope * U2;
    const double h1 = 1.0 / (2.0 * U1), h2 = 1.0 / (2.0 * U2);
    const int m1 = static_cast<int>(std::ceil((y1b - y1a) / h1)) + 1;
    const int m2 = static_cast<int>(std::ceil((y2b - y2a) / h2)) + 1;
    const int n1 = detail::next_pow2(opt.padding * m1), n2 = detail::next_pow2(opt.padding * m2);
    std::vector<double> g(static_cast<std::size_t>(m1) * m2);
    for (int i = 0; i < m1; ++i) {
        const double y1 = y1a + i * h1;
        const double hint = cover.center(iota) + eps * y1 / v;
        for (int j = 0; j < m2; ++j) {
            const Vec xi = cover.from_coords(iota, Vec{y1, y2a + j * h2});
            g[static_cast<std::size_t>(i) * m2 + j] = cover.eta(iota, xi, hint);
        }
    }
    auto riemann = [&](double shift, double& outer) {
        std::vector<cplx> a(static_cast<std::size_t>(n1) * n2, 0.0);
        for (int i = 0; i < m1; ++i)
            for (int j = 0; j < m2; ++j) {
                const double val = g[static_cast<std::size_t>(i) * m2 + j];
                if (val == 0.0) continue;
                a[static_cast<std::size_t>(i) * n2 + j] =
                    val * FourierConvention::forward_kernel(shift * (static_cast<double>(i) / n1 + static_cast<double>(j) / n2));
            }
        const double total = detail::dft_abs_mean(a, n1, n2);
        double band = 0.0;
        for (int i = 0; i < n1; ++i) {
            const int fi = std::min(i, n1 - i);
            for (int j = 0; j < n2; ++j) {
                const int fj = std::min(j, n2 - j);
                if (4 * fi >= 3 * (n1 / 2) || 4 * fj >= 3 * (n2 / 2))
                    band += std::abs(a[static_cast<std::size_t>(i) * n2 + j]);
            }
        }
        outer = band / (static_cast<double>(n1) * n2);
        return total;
    };
    double band0 = 0.0, band1 = 0.0;
    const double s0 = riemann(0.0, band0);
    const double s1 = riemann(0.5, band1);
    NormMeasurement m;
    m.kind = NormKind::L1;
    m.exponent = Rational(1);
    m.value = 0.5 * (s0 + s1);
    m.rel_error = (0.5 * std::abs(s0 - s1) + std::max(band0, band1)) / m.value;
    m.truncation = std::max(U1, U2);
    m.nodes = static_cast<long>(n1) * n2;
    return m;
}

/// As l1_norm_tube_at, doubling both bands (at most twice) until the
/// estimated error is at most 5%.
inline NormMeasurement l1_norm_tube(const TubeCover& cover, int iota, L1Options opt = {})
{
    NormMeasurement m;
    for (int attempt = 0; attempt < 3; ++attempt) {
        m = l1_norm_tube_at(cover, iota, opt);
        if (m.admissible()) return m;
        opt.band_normal *= 2.0;
        opt.band_tangent *= 2.0;
    }
    throw AccuracyError("per-tube L1 error estimate above 5% at the largest band", m.value, m.rel_error * m.value);
}

/// Σ_ι ‖η̌_ι‖₁ together with the per-tube values it was assembled from.
struct L1Total {
    NormMeasurement total;
    /// (ι, measurement) for every tube actually transformed.
    std::vector<std::pair<int, NormMeasurement>> tubes;
    /// max/min − 1 over the interior sample.
    double interior_spread = 0.0;
    int end_tubes = 0;
};

/// End tubes (those touching a cap) are summed individually; the interior
/// range [a, b] is integrated in ι by composite Simpson on 2n+1 sample tubes
/// with the Euler–Maclaurin endpoint correction (f(a) + f(b))/2, and the
/// Simpson–trapezoid gap joins the error estimate.
inline L1Total l1_norm_total(const TubeCover& cover, int half_intervals = 8, const L1Options& opt = {},
                             int threads = 1)
{
    if (cover.k() != 2) throw DomainError("total L1 norms are implemented for k = 2 only");
    const double eps = cover.epsilon();
    auto touches_cap = [&](int i) {
        const TubeAtom probe(cover, i);
        const double cap = 3.0 * kTildeInner / cover.speed(i);
        return (cover.extended_lo() - cover.center(i)) / eps + cap > probe.sigma_lo() ||
               (cover.extended_hi() - cover.center(i)) / eps - cap < probe.sigma_hi();
    };
    int a = 0;
    while (a < cover.size() && touches_cap(a)) ++a;
    int b = cover.size() - 1;
    while (b > a && touches_cap(b)) --b;
    std::vector<int> ids;
    for (int i = 0; i < a; ++i) ids.push_back(i);
    for (int i = b + 1; i < cover.size(); ++i) ids.push_back(i);
    const int ends = static_cast<int>(ids.size());
    const int n2 = 2 * half_intervals;
    if (b - a < n2) throw DomainError("too few interior tubes for the Simpson sum");
    std::vector<double> nodes;
    for (int s = 0; s <= n2; ++s) {
        nodes.push_back(a + (b - a) * static_cast<double>(s) / n2);
        ids.push_back(static_cast<int>(std::lround(nodes.back())));
    }
    std::vector<NormMeasurement> ms(ids.size());
    parallel_for(ids.size(), threads, [&](std::size_t i) { ms[i] = l1_norm_tube(cover, ids[i], opt); });

    L1Total out;
    out.end_tubes = ends;
    std::vector<double> parts, errs;
    for (int i = 0; i < ends; ++i) {
        parts.push_back(ms[i].value);
        errs.push_back(ms[i].rel_error * ms[i].value);
    }
    std::vector<double> f(n2 + 1);
    double lo = INFINITY, hi = 0.0, node_err = 0.0;
    for (int s = 0; s <= n2; ++s) {
        f[s] = ms[ends + s].value;
        lo = std::min(lo, f[s]);
        hi = std::max(hi, f[s]);
        node_err = std::max(node_err, ms[ends + s].rel_error);
    }
    const double step = static_cast<double>(b - a) / n2;
    double simpson = f[0] + f[n2], trap = 0.5 * (f[0] + f[n2]);
    for (int s = 1; s < n2; ++s) {
        simpson += (s % 2 ? 4.0 : 2.0) * f[s];
        trap += f[s];
    }
    simpson *= step / 3.0;
    trap *= step;
    const double interior = simpson + 0.5 * (f[0] + f[n2]);
    parts.push_back(interior);
    errs.push_back(std::abs(simpson - trap) + node_err * interior);
    out.total.kind = NormKind::L1;
    out.total.exponent = Rational(1);
    out.total.value = pairwise_sum(parts);
    out.total.rel_error = pairwise_sum(errs) / out.total.value;
    out.interior_spread = hi / lo - 1.0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out.total.nodes += ms[i].nodes;
        out.total.truncation = std::max(ms[i].truncation, i ? out.total.truncation : 0.0);
        out.tubes.emplace_back(ids[i], ms[i]);
    }
    return out;
}

} // namespace mcurve
