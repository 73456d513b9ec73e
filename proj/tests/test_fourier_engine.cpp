#include <catch_amalgamated.hpp>

#include <numbers>

#include "mcurve/fourier_engine.hpp"

using namespace mcurve;
using Catch::Approx;

namespace {

struct RiemannTube {
    cplx value;
    double l2_squared = 0.0;
};

// Midpoint rule for ∫ η_ι(ξ) e^{2πi x·ξ} dξ over the shear chart
// y = c(σ) + (0, r) of a k = 2 tube, evaluating η_ι pointwise.
RiemannTube riemann_tube(const TubeCover& cover, int iota, const std::vector<Vec>& xs, int n_sigma, int n_r,
                         std::vector<cplx>& out)
{
    const double eps = cover.epsilon(), det = eps * eps * eps;
    const double s_half = 0.03 / cover.speed(iota), r_half = 3e-4;
    const double hs = 2 * s_half / n_sigma, hr = 2 * r_half / n_r;
    out.assign(xs.size(), 0.0);
    RiemannTube res;
    std::vector<cplx> rows(xs.size());
    for (int a = 0; a < n_sigma; ++a) {
        const double s = -s_half + (a + 0.5) * hs;
        Vec c, d1, d2;
        cover.rescaled_curve(iota, s, c, d1, d2);
        std::fill(rows.begin(), rows.end(), cplx(0.0));
        double l2 = 0.0;
        for (int b = 0; b < n_r; ++b) {
            const double r = -r_half + (b + 0.5) * hr;
            const Vec xi = cover.from_coords(iota, Vec{c[0], c[1] + r});
            const double e = cover.eta(iota, xi);
            if (e == 0.0) continue;
            l2 += e * e;
            for (std::size_t n = 0; n < xs.size(); ++n) {
                const double ph = 2 * std::numbers::pi * xs[n].dot(xi);
                rows[n] += e * cplx(std::cos(ph), std::sin(ph));
            }
        }
        const double w = det * d1[0] * hs * hr;
        for (std::size_t n = 0; n < xs.size(); ++n) out[n] += w * rows[n];
        res.l2_squared += w * l2;
    }
    return res;
}

// ∫ η e^{2πi x·ξ} dξ summed directly over every node of a global (t, r) table.
cplx table_quadrature(const ProfileTable& tab, const Vec& x)
{
    std::vector<cplx> parts(tab.t_count());
    double r[kMaxDim];
    for (std::size_t i = 0; i < tab.t_count(); ++i) {
        const auto geo = tab.geometry(tab.t_node(i));
        cplx s = 0.0;
        for (std::size_t idx = 0; idx < tab.rows(); ++idx) {
            const double e = tab.row(i)[idx];
            if (e == 0.0) continue;
            tab.r_of(idx, r);
            const double ph = 2 * std::numbers::pi * x.dot(tab.point(geo, idx));
            s += tab.jacobian(geo, r[0]) * e * cplx(std::cos(ph), std::sin(ph));
        }
        parts[i] = tab.t_weight(i) * tab.r_step() * s;
    }
    return pairwise_sum(parts);
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

} // namespace

TEST_CASE("Fourier kernels reduce the phase", "[fourier]")
{
    CHECK(std::abs(FourierConvention::inverse_kernel(0.25) - cplx(0, 1)) <= 1e-15);
    CHECK(std::abs(FourierConvention::forward_kernel(0.25) - cplx(0, -1)) <= 1e-15);
    CHECK(std::abs(FourierConvention::inverse_kernel(1e9 + 0.125) -
                   cplx(std::sqrt(0.5), std::sqrt(0.5))) <= 1e-7);
    CHECK(FourierConvention::inverse_kernel(-3.0) == cplx(1.0, 0.0));
}

TEST_CASE("FFT L1 normalization on a Gaussian", "[fourier][fixture]")
{
    // g(ξ) = e^{-π|ξ|²} is its own transform: ‖ǧ‖₁ = 1, ‖ǧ‖₂² = ‖g‖₂² = 1/2.
    const int N = 128;
    const double h = 0.08;
    std::vector<cplx> a(static_cast<std::size_t>(N) * N);
    double g2 = 0.0;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            const double u = (i - N / 2) * h, v = (j - N / 2) * h;
            const double g = std::exp(-std::numbers::pi * (u * u + v * v));
            a[static_cast<std::size_t>(i) * N + j] = g;
            g2 += g * g * h * h;
        }
    CHECK(detail::dft_abs_mean(a, N, N) == Approx(1.0).epsilon(1e-9));
    double x2 = 0.0;
    for (const cplx& z : a) x2 += std::norm(z);
    x2 *= h * h / (static_cast<double>(N) * N);
    CHECK(g2 == Approx(0.5).epsilon(1e-12));
    CHECK(x2 == Approx(g2).epsilon(1e-12));
    CHECK(detail::next_pow2(129) == 256);
    CHECK(detail::next_pow2(64) == 64);
}

TEST_CASE("tube atom at the origin and conjugate symmetry", "[fourier]")
{
    const TubeCover cover(CurveSpec::moment(2), 1.0 / 32, 256);
    for (int iota : {0, 4000, cover.size() - 1}) {
        const TubeAtom atom(cover, iota);
        const cplx z = inverse_ft_tube(atom, Vec{0.0, 0.0});
        CHECK(z.imag() == 0.0);
        CHECK(z.real() == Approx(atom.det() * atom.integral()).epsilon(1e-14));
        CHECK(z.real() > 0.0);
        const Vec x{37.0, -410.0};
        const cplx p = inverse_ft_tube(atom, x), m = inverse_ft_tube(atom, Vec{-37.0, 410.0});
        CHECK(std::abs(p - std::conj(m)) <= 1e-12 * std::abs(z));
    }
}

TEST_CASE("tube atom matches a pointwise Riemann sum", "[fourier][oracle]")
{
    const double eps = 1.0 / 32;
    const TubeCover cover(CurveSpec::moment(2), eps, 256);
    for (int iota : {4096, 1, cover.size() - 1}) {
        const TubeAtom atom(cover, iota);
        const Vec e1 = cover.frame_column(iota, 0), e2 = cover.frame_column(iota, 1);
        const std::vector<Vec> xs = {Vec{0.0, 0.0}, e1 * (25.0 / eps), e2 * (1500.0 / (eps * eps)),
                                     e1 * (40.0 / eps) + e2 * (800.0 / (eps * eps))};
        std::vector<cplx> ref;
        const RiemannTube rt = riemann_tube(cover, iota, xs, 6400, 240, ref);
        INFO("iota = " << iota);
        // Change of variables: det(D) ∫ g dy against the ξ-side sum.
        CHECK(atom.det() * atom.integral() == Approx(ref[0].real()).epsilon(1e-6));
        for (std::size_t n = 1; n < xs.size(); ++n) {
            const cplx v = inverse_ft_tube(atom, xs[n]);
            CHECK(std::abs(v - ref[n]) <= 1e-4 * std::abs(ref[0]));
            CHECK(std::abs(v) == Approx(std::abs(ref[n])).epsilon(0.05));
        }
        const double k = 2;
        CHECK(rt.l2_squared <= std::pow(4e-2, k) * std::pow(eps, k * (k + 1) / 2));
    }
}

TEST_CASE("tube atom is stable under refinement", "[fourier][property]")
{
    const TubeCover cover(CurveSpec::moment(2), 1.0 / 32, 256);
    const int iota = 2000;
    const TubeAtom a(cover, iota);
    const TubeAtom fine(cover, iota, Vec{400.0, 8000.0});
    CHECK(fine.nodes() > a.nodes());
    const Vec x = cover.frame_column(iota, 0) * 300.0 + cover.frame_column(iota, 1) * 2.0e5;
    const cplx z = inverse_ft_tube(a, Vec{0.0, 0.0});
    CHECK(std::abs(inverse_ft_tube(a, x) - inverse_ft_tube(fine, x)) <= 1e-5 * std::abs(z));
}

TEST_CASE("inverse_ft_total agrees with direct table quadrature", "[fourier][oracle]")
{
    const TubeCover cover(CurveSpec::moment(2), 1.0 / 16, 256);
    ProfileOptions po;
    po.interior_panels = 256;
    const ProfileTable tab(cover, po);
    std::vector<Vec> xs = {Vec{0.0, 0.0}};
    auto rng = stratum_rng(5, {1});
    for (int n = 0; n < 4; ++n) {
        const double r = 60 * std::sqrt(uniform01(rng)), th = 2 * std::numbers::pi * uniform01(rng);
        xs.push_back(Vec{r * std::cos(th), r * std::sin(th)});
        xs.push_back(Vec{-r * std::cos(th), -r * std::sin(th)});
    }
    const auto per_tube = inverse_ft_tubes(cover, xs);
    std::vector<cplx> total(xs.size()), reversed(xs.size());
    for (std::size_t n = 0; n < xs.size(); ++n) {
        std::vector<cplx> col;
        for (const auto& row : per_tube) col.push_back(row[n]);
        total[n] = pairwise_sum(col);
        for (auto it = col.rbegin(); it != col.rend(); ++it) reversed[n] += *it;
    }
    const std::vector<cplx> api = inverse_ft_total(cover, xs);
    CHECK(total[0].imag() == 0.0);
    CHECK(total[0].real() > 0.0);
    for (std::size_t n = 0; n < xs.size(); ++n) {
        CHECK(api[n] == total[n]);
        CHECK(std::abs(reversed[n] - total[n]) <= 1e-12 * std::abs(total[0]));
        CHECK(rel(total[n], table_quadrature(tab, xs[n])) <= 1e-3);
    }
    for (std::size_t n = 1; n < xs.size(); n += 2) CHECK(std::abs(total[n] - std::conj(total[n + 1])) <= 1e-12 * std::abs(total[0]));
    const GlobalTransform g(tab);
    for (std::size_t n = 0; n < xs.size(); ++n) CHECK(rel(g(xs[n]).value, total[n]) <= 1e-3);
}

TEST_CASE("windowed transform agrees with tube sums away from the origin", "[fourier][oracle]")
{
    const TubeCover cover(CurveSpec::moment(2), 1.0 / 16, 256);
    const ProfileTable tab(cover);
    const GlobalTransform g(tab);
    const std::vector<Vec> xs = {Vec{300.0, -2500.0}};
    for (const Vec& x : xs) {
        const cplx ref = inverse_ft_total(cover, x);
        CHECK(rel(g(x).value, ref) <= 1e-3);
    }
}

TEST_CASE("windowed transform is conjugate symmetric", "[fourier][property]")
{
    const TubeCover cover(CurveSpec::moment(2), 1.0 / 32, 256);
    const ProfileTable tab(cover);
    const GlobalTransform g(tab);
    const double scale = std::abs(g(Vec{0.0, 0.0}).value);
    auto rng = stratum_rng(8, {2});
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
        const double r = std::exp(std::log(1e5) * uniform01(rng)), th = 2 * std::numbers::pi * uniform01(rng);
        const Vec x{r * std::cos(th), r * std::sin(th)};
        worst = std::max(worst, std::abs(g(x).value - std::conj(g(x * -1.0).value)) / scale);
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("L2 norm scaling and refinement", "[fourier][l2]")
{
    std::vector<double> v2;
    for (int m = 4; m <= 6; ++m) v2.push_back(l2_norm_eta(TubeCover(CurveSpec::moment(2), std::ldexp(1.0, -m), 256)).value);
    CHECK(v2[1] / v2[2] == Approx(2.0).epsilon(0.15));
    CHECK(v2[0] / v2[1] == Approx(2.0).epsilon(0.15));

    const NormMeasurement a = l2_norm_eta(TubeCover(CurveSpec::moment(3), 1.0 / 16, 256));
    const NormMeasurement b = l2_norm_eta(TubeCover(CurveSpec::moment(3), 1.0 / 32, 256));
    CHECK(a.value / b.value == Approx(std::pow(2.0, 2.5)).epsilon(0.15));
    CHECK(a.admissible());

    const TubeCover cover(CurveSpec::moment(2), 1.0 / 32, 256);
    const NormMeasurement base = l2_norm_eta(ProfileTable(cover));
    ProfileOptions fine;
    fine.interior_panels = 64;
    fine.cap_panels = 24;
    fine.r_nodes = 321;
    const NormMeasurement ref = l2_norm_eta(ProfileTable(cover, fine));
    CHECK(std::abs(base.value - ref.value) <= base.rel_error * base.value);
    CHECK(base.kind == NormKind::L2);
}

TEST_CASE("per-tube L1 bounds, refinement and scale invariance", "[fourier][l1]")
{
    const TubeCover cover(CurveSpec::moment(2), 1.0 / 32, 256);
    for (int iota : {0, 3000, 6000}) {
        const NormMeasurement m = l1_norm_tube(cover, iota);
        const TubeAtom atom(cover, iota);
        CHECK(m.value >= atom.integral());
        CHECK(m.value >= cover.eta(iota, cover.center_point(iota)));
        L1Options fine;
        fine.band_normal *= 2;
        fine.band_tangent *= 2;
        const NormMeasurement r = l1_norm_tube(cover, iota, fine);
        INFO("iota = " << iota);
        CHECK(std::abs(m.value - r.value) <= m.rel_error * m.value);
    }
    // The tube centred at t = 1/2 across scales.
    std::vector<double> mid;
    for (int m = 4; m <= 6; ++m) {
        const double eps = std::ldexp(1.0, -m);
        const TubeCover c(CurveSpec::moment(2), eps, 256);
        mid.push_back(l1_norm_tube(c, static_cast<int>(std::lround(0.5 * 256 / eps))).value);
    }
    for (double v : mid) CHECK(v == Approx(mid.front()).epsilon(0.10));
}

TEST_CASE("Monte Carlo L^p' norms: Plancherel and the L1 sandwich", "[fourier][lp][slow]")
{
    for (int m = 4; m <= 6; ++m) {
        const TubeCover cover(CurveSpec::moment(2), std::ldexp(1.0, -m), 256);
        const ProfileTable tab(cover);
        const NormMeasurement l2 = l2_norm_eta(tab);
        LpOptions lo;
        lo.exponents = {Rational(2)};
        lo.budget = 6000;
        lo.seed = 3;
        const NormMeasurement mc = lp_norms_total(tab, lo).front();
        INFO("eps = 2^-" << m << " mc " << mc.value << " +- " << mc.rel_error << " l2 " << l2.value);
        CHECK(std::abs(mc.value / l2.value - 1.0) <= 0.02);
    }
    const TubeCover cover(CurveSpec::moment(2), 1.0 / 16, 256);
    const ProfileTable tab(cover);
    const L1Total tot = l1_norm_total(cover);
    double max_tube = 0.0;
    for (const auto& [iota, t] : tot.tubes) max_tube = std::max(max_tube, t.value);
    const NormMeasurement l1 = lp_norm_total(tab, Rational(1), 6000, 4);
    CHECK(l1.value >= max_tube);
    CHECK(l1.value <= tot.total.value * (1.0 + tot.total.rel_error));
}

TEST_CASE("Monte Carlo estimates are reproducible across thread counts", "[fourier][lp]")
{
    const TubeCover cover(CurveSpec::moment(2), 1.0 / 16, 256);
    const ProfileTable tab(cover);
    LpOptions lo;
    lo.exponents = {Rational(3, 2), Rational(1)};
    lo.budget = 2000;
    lo.seed = 11;
    const auto a = lp_norms_total(tab, lo);
    lo.threads = 3;
    const auto b = lp_norms_total(tab, lo);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].value == b[i].value);
        CHECK(a[i].rel_error == b[i].rel_error);
    }
}

TEST_CASE("norm routines reject unsupported input", "[fourier]")
{
    const TubeCover c3(CurveSpec::moment(3), 1.0 / 16, 256);
    const ProfileTable t3(c3);
    CHECK_THROWS_AS(lp_norms_total(t3, LpOptions{}), DomainError);
    CHECK_THROWS_AS(l1_norm_tube(c3, 10), DomainError);
    const TubeCover c2(CurveSpec::moment(2), 1.0 / 16, 256);
    CHECK_THROWS_AS(TubeAtom(c2, c2.size()), DomainError);
}
