#include <catch_amalgamated.hpp>

#include "mcurve/bump_partition.hpp"

using namespace mcurve;
using Catch::Approx;

namespace {

// Σ_ι η_ι over every tube of the cover, no lookup window.
double brute_eta_total(const TubeCover& cover, const Vec& xi)
{
    double s = 0.0;
    for (int i = 0; i < cover.size(); ++i) s += cover.eta(i, xi);
    return s;
}

int brute_overlap(const TubeCover& cover, const Vec& xi, int& lo, int& hi)
{
    int n = 0;
    lo = cover.size();
    hi = -1;
    for (int i = 0; i < cover.size(); ++i)
        if (cover.chi(i, xi) > 0.0) {
            ++n;
            lo = std::min(lo, i);
            hi = std::max(hi, i);
        }
    return n;
}

} // namespace

TEST_CASE("bump profile values and symmetry", "[bump]")
{
    for (double s : {0.0, 0.005, 0.01, -0.01}) CHECK(bump_profile(s) == 1.0);
    for (double s : {0.02, -0.02, 0.5}) CHECK(bump_profile(s) == 0.0);
    for (int n = 0; n <= 400; ++n) {
        const double s = -0.025 + n * 1.25e-4;
        const double v = bump_profile(s);
        CHECK((v >= 0.0 && v <= 1.0));
        CHECK(v == bump_profile(-s));
    }
    CHECK(phi(Vec{0.01, -0.01}) == 1.0);
    CHECK(phi(Vec{0.0, 0.02}) == 0.0);
    CHECK(phi_tilde(1e-4) == 1.0);
    CHECK(phi_tilde(2e-4) == 0.0);
    CHECK(smooth_step(0.5) == Approx(0.5).margin(1e-15));
}

TEST_CASE("bump profile has continuous low derivatives", "[bump][property]")
{
    const double h = 1e-6, a = kBumpInner;
    auto d1 = [&](double s) { return (bump_profile(s + h) - bump_profile(s - h)) / (2 * h); };
    auto d2 = [&](double s) { return (bump_profile(s + h) - 2 * bump_profile(s) + bump_profile(s - h)) / (h * h); };
    for (double s0 : {a, 2 * a, -a, -2 * a}) {
        CHECK(std::abs(d1(s0 + h) - d1(s0 - h)) <= 1e-3);
        CHECK(std::abs(d2(s0 + 4 * h) - d2(s0 - 4 * h)) <= 1e-3 * 1e4);
    }
    double m1 = 0.0;
    for (int n = 0; n <= 2000; ++n) m1 = std::max(m1, std::abs(d1(a + n * a / 2000)));
    CHECK(m1 < 10.0 / a);
}

TEST_CASE("tube centers", "[partition]")
{
    const double eps = 1.0 / 16;
    const TubeCover cover(CurveSpec::moment(2), eps, 8);
    CHECK(cover.center(0) == 0.0);
    for (int i = 1; i + 1 < cover.size(); ++i) CHECK(cover.center(i) - cover.center(i - 1) == Approx(eps / 8));
    CHECK(cover.center(cover.size() - 1) >= 1.0 - eps / 8);
    CHECK_THROWS_AS(TubeCover(CurveSpec::moment(2), eps, 3), DomainError);
    CHECK_THROWS_AS(cover.chi(cover.size(), Vec{0, 0}), DomainError);
}

TEST_CASE("chi and chi tilde at constructed points", "[partition]")
{
    const double eps = 1.0 / 32;
    const TubeCover cover(CurveSpec::moment(2), eps, 256);
    for (int i : {0, 100, 4000, cover.size() - 1}) {
        const Vec c = cover.center_point(i);
        CHECK(cover.chi(i, c) == 1.0);
        CHECK(cover.chi_tilde(i, c) == 1.0);
        CHECK(cover.sum_chi(c) >= 1.0);
        CHECK(cover.chi(i, c + cover.frame_column(i, 0) * (3e-2 * eps)) == 0.0);
        const double mid = cover.chi(i, c + cover.frame_column(i, 1) * (1.5e-2 * eps * eps));
        CHECK((mid > 0.0 && mid < 1.0));
        CHECK(cover.chi_tilde(i, c + cover.frame_column(i, 1) * (3e-4 * eps * eps)) == 0.0);
    }
    CHECK(cover.eta_total(Vec{0.5, 0.25 + eps}) == 0.0);
}

TEST_CASE("eta equals one on an isolated inner box", "[partition]")
{
    // With C0 = 2 neighbouring tubes are eps/2 apart, far beyond the 2e-2 support.
    const TubeCover cover(CurveSpec::moment(2), 1.0 / 8, 2);
    const Vec c = cover.center_point(3);
    CHECK(cover.eta(3, c) == 1.0);
    CHECK(cover.eta(2, c) == 0.0);
}

TEST_CASE("active window contains every tube with chi > 0", "[partition][oracle]")
{
    for (int k : {2, 3}) {
        const double eps = 1.0 / 16;
        const TubeCover cover(CurveSpec::moment(k), eps, 256);
        const std::vector<Vec> pts = sample_thin_tube(cover, 300, 4);
        for (const Vec& xi : pts) {
            int lo, hi;
            brute_overlap(cover, xi, lo, hi);
            const TubeRange r = cover.active_tubes(xi);
            REQUIRE(hi >= lo);
            CHECK(r.first <= lo);
            CHECK(r.last >= hi);
        }
    }
}

TEST_CASE("windowed eta_total matches brute-force tube sums", "[partition][oracle]")
{
    const double eps = 1.0 / 16;
    for (int k : {2, 3}) {
        const TubeCover cover(CurveSpec::moment(k), eps, 256);
        auto rng = stratum_rng(9, {static_cast<std::uint64_t>(k)});
        double worst = 0.0;
        for (int n = 0; n < 200; ++n) {
            const double t = uniform01(rng);
            const FrenetFrame f = frenet_frame(cover.spec(), t);
            Vec xi = gamma(cover.spec(), t);
            for (int j = 0; j < k; ++j)
                xi += f.M.col(j) * ((2.0 * uniform01(rng) - 1.0) * 0.03 * std::pow(eps, j + 1));
            worst = std::max(worst, std::abs(cover.eta_total(xi) - brute_eta_total(cover, xi)));
        }
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("partition of unity on the thin tube", "[partition][property]")
{
    for (int k : {2, 3})
        for (int m : {4, 6}) {
            const TubeCover cover(CurveSpec::moment(k), std::ldexp(1.0, -m), 256);
            double worst = 0.0, range_lo = 1.0, range_hi = 0.0;
            for (const Vec& xi : sample_thin_tube(cover, 2000, 21)) {
                const TubeRange r = cover.active_tubes(xi);
                double s = 0.0;
                for (int i = r.first; i <= r.last; ++i) {
                    const double e = cover.eta(i, xi);
                    CHECK((e >= 0.0 && e <= 1.0));
                    if (e > 0.0) CHECK(cover.chi(i, xi) > 0.0);
                    s += e;
                }
                worst = std::max(worst, std::abs(s - 1.0));
                const double tot = cover.eta_total(xi);
                range_lo = std::min(range_lo, tot);
                range_hi = std::max(range_hi, tot);
            }
            INFO("k = " << k << " eps = 2^-" << m);
            CHECK(worst <= 1e-8);
            CHECK(range_lo >= 1.0 - 1e-8);
            CHECK(range_hi <= 1.0 + 1e-12);
        }
}

TEST_CASE("eta_total is one on the curve", "[partition][property]")
{
    const TubeCover cover(CurveSpec::moment(2), 1.0 / 64, 256);
    for (int n = 0; n <= 1000; ++n) CHECK(cover.eta_total(cover.curve().point(n / 1000.0)) == Approx(1.0).margin(1e-8));
}

TEST_CASE("eta_total decays monotonically across the fringe", "[partition]")
{
    const double eps = 1.0 / 32;
    const TubeCover cover(CurveSpec::moment(2), eps, 256);
    const int i = cover.size() / 3;
    const Vec c = cover.center_point(i), e2 = cover.frame_column(i, 1);
    double prev = 1.0;
    std::vector<double> profile;
    for (int n = 0; n <= 30; ++n) {
        const double v = cover.eta_total(c + e2 * (n * 1e-5 * eps * eps));
        CHECK((v >= 0.0 && v <= 1.0));
        CHECK(v <= prev + 1e-12);
        prev = v;
        profile.push_back(v);
    }
    CHECK(profile[10] == Approx(1.0).margin(1e-12));
    CHECK(profile[20] == 0.0);
    // Frozen from this construction: the χ̃ collar seen through the chart.
    CHECK(profile[15] == Approx(0.5).margin(0.05));
}

TEST_CASE("calibration fixtures", "[partition][calibration]")
{
    const Calibration c2 = calibrate_C0(CurveSpec::moment(2), 1.0 / 64);
    CHECK(c2.C0 == 256);
    CHECK(c2.diagnostics.min_sum_chi >= 0.5);
    CHECK(c2.diagnostics.max_absorption_defect <= 1e-8);
    const Calibration c3 = calibrate_C0(CurveSpec::moment(3), 1.0 / 32);
    CHECK(c3.C0 == 256);
    CHECK(c3.diagnostics.valid());
    CHECK_THROWS_AS(calibrate_C0(CurveSpec::moment(2), 0.5), DomainError);
}

TEST_CASE("overlap count does not depend on epsilon", "[partition][property]")
{
    std::vector<int> ov;
    for (int m = 4; m <= 7; ++m)
        ov.push_back(diagnose_cover(TubeCover(CurveSpec::moment(2), std::ldexp(1.0, -m), 256), 2000, 1).max_overlap);
    for (int v : ov) CHECK(v == ov.front());
}
