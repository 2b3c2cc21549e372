#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hybridoem/core_model.hpp"
#include "hybridoem/errors.hpp"
#include "hybridoem/sweeps.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <vector>

using namespace hoem;

namespace {

DriveConfig drive(double P_o, double P_e, double Delta_o, double Delta_e) {
    return DriveConfig{P_o, P_e, 1e-9, Delta_o, Delta_e, Convention::standard};
}

DriveConfig red(double P_o) {
    const double wm = SystemParams::reference().omega_m;
    return drive(P_o, 1e-6, wm, wm);
}

DriveConfig blue(double P_o, double P_e = 1e-6) {
    const double wm = SystemParams::reference().omega_m;
    return drive(P_o, P_e, -wm, wm);
}

Spectrum sweep(const DriveConfig& d, std::size_t count = 2001) {
    const auto p = SystemParams::reference();
    auto axis = AxisSpec::around_cavity(p);
    axis.count = count;
    return spectrum_sweep(p, d, axis);
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * i / (n - 1));
    return v;
}

bool bitwise_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("default axis") {
    const auto p = SystemParams::reference();
    const auto axis = AxisSpec::around_cavity(p);
    CHECK(axis.count == 2001);
    CHECK(axis.min == doctest::Approx(-3.0 * p.kappa_o).epsilon(1e-15));
    CHECK(axis.max == doctest::Approx(3.0 * p.kappa_o).epsilon(1e-15));
    const auto v = axis.values();
    REQUIRE(v.size() == 2001);
    CHECK(v.front() == axis.min);
    CHECK(v.back() == axis.max);
    CHECK(v[1000] == 0.0);
}

TEST_CASE("spectrum without the optical pump is the bare dip") {
    const auto s = sweep(red(0.0));
    CHECK(s.points.size() == 2001);
    std::size_t imin = 0;
    for (std::size_t i = 0; i < s.points.size(); ++i) {
        if (s.points[i].t_sq < s.points[imin].t_sq) imin = i;
    }
    CHECK(std::abs(s.points[imin].Delta_p) < 2.0 * (s.axis[1] - s.axis[0]));
    CHECK(s.points[imin].t_sq == doctest::Approx(0.0576).epsilon(1e-3));
    const auto label = classify_regime(s);
    CHECK(label.label == Regime::bare);
    REQUIRE(label.metrics.window_width.has_value());
    const auto p = s.params;
    const double level = 0.5 * (label.metrics.center_t_sq + label.metrics.max_t_sq);
    // |t|^2 = (kappa_i^2 + D^2) / (kappa^2 + D^2) with kappa_i = kappa - kappa_ext.
    const double ki = p.kappa_o - p.kappa_o_ext;
    const double D = std::sqrt((level * p.kappa_o * p.kappa_o - ki * ki) / (1.0 - level));
    CHECK(*label.metrics.window_width == doctest::Approx(2.0 * D).epsilon(2e-3));

    SUBCASE("peak of the monotone tails sits at an axis edge") {
        const auto [x_peak, y_peak] = find_peak_transmission(s);
        CHECK(std::abs(std::abs(x_peak) - 3.0 * p.kappa_o) < 1e-6 * p.kappa_o);
        CHECK(y_peak < 1.0);
    }
}

TEST_CASE("red/red spectra show a transparency window") {
    const auto s2 = sweep(red(2e-3));
    const auto s3 = sweep(red(3e-3));
    for (const auto* s : {&s2, &s3}) {
        CHECK(s->stability.stable);
        CHECK(s->center.t_sq > 0.9);
        CHECK(s->phase_jumps.empty());
        for (std::size_t i = 1; i < s->points.size(); ++i) {
            CHECK(std::abs(s->points[i].phase - s->points[i - 1].phase) < std::numbers::pi);
        }
        // Flanking dips on both sides of the window, near the bare depth.
        const std::size_t c = s->points.size() / 2;
        double left = INFINITY, right = INFINITY;
        for (std::size_t i = 0; i < c; ++i) left = std::min(left, s->points[i].t_sq);
        for (std::size_t i = c + 1; i < s->points.size(); ++i) right = std::min(right, s->points[i].t_sq);
        CHECK(left < 0.1);
        CHECK(right < 0.1);
    }
    CHECK(s3.center.t_sq > s2.center.t_sq);

    const auto label = classify_regime(s2);
    CHECK(label.label == Regime::eit);
    REQUIRE(label.metrics.dip_separation.has_value());
    CHECK(*label.metrics.dip_separation > 0.0);
    REQUIRE(label.metrics.window_width.has_value());
    CHECK(*label.metrics.window_width < *label.metrics.dip_separation);
    CHECK(std::abs(label.metrics.Delta_p_at_max) < 0.1 * *label.metrics.dip_separation);
    for (const auto& pt : s2.points) CHECK(pt.t_sq <= 1.0 + 1e-9);
}

TEST_CASE("finite sideband resolution lets the 3 mW red window exceed unity") {
    // Residual Stokes-sideband gain at omega_m / kappa_o = 3.4.
    const auto s3 = sweep(red(3e-3));
    const auto label = classify_regime(s3);
    CHECK(label.metrics.max_t_sq > 1.0);
    CHECK(label.metrics.max_t_sq < 1.01);
    CHECK(label.label == Regime::amplification);

    // Ten times better resolution at the same photon numbers removes the gain.
    auto p = SystemParams::reference();
    p.omega_m *= 10.0;
    const auto d = drive(3e-3 * 100.0, 1e-6 * 100.0, p.omega_m, p.omega_m);
    const auto resolved = spectrum_sweep(p, d, AxisSpec{-2e6, 2e6, 8001});
    for (const auto& pt : resolved.points) CHECK(pt.t_sq <= 1.0 + 1e-9);
}

TEST_CASE("blue/red spectra") {
    const auto s10 = sweep(blue(10e-6));
    const auto s40 = sweep(blue(40e-6));
    CHECK(s10.center.t_sq < 0.0576);
    CHECK(classify_regime(s10).label == Regime::eia);
    const auto l40 = classify_regime(s40);
    CHECK(l40.label == Regime::amplification);
    CHECK(l40.metrics.max_t_sq > 1.0);
    CHECK(std::abs(l40.metrics.Delta_p_at_max) < 1e3);
    CHECK(s40.stability.stable);

    SUBCASE("unstable points still produce a flagged spectrum") {
        const auto su = sweep(blue(40e-6, 0.0));
        CHECK_FALSE(su.stability.stable);
        for (const auto& pt : su.points) CHECK_FALSE(pt.stable);
    }
}

TEST_CASE("classification is grid and probe independent") {
    for (const auto& d : {red(0.0), red(2e-3), red(3e-3), blue(10e-6), blue(40e-6)}) {
        const auto reference = classify_regime(sweep(d)).label;
        CHECK(classify_regime(sweep(d, 1001)).label == reference);
        CHECK(classify_regime(sweep(d, 4001)).label == reference);
        auto weak = d;
        weak.P_p = 1e-15;
        CHECK(classify_regime(sweep(weak)).label == reference);
    }
}

TEST_CASE("classification needs the full cavity window") {
    const auto p = SystemParams::reference();
    AxisSpec narrow{-p.kappa_o, p.kappa_o, 501};
    const auto s = spectrum_sweep(p, red(2e-3), narrow);
    CHECK_THROWS_AS(classify_regime(s), CoverageError);
}

TEST_CASE("parabolic peak refinement") {
    Spectrum s;
    const double x0 = 0.3137;
    for (int i = 0; i <= 200; ++i) {
        const double x = -5.0 + 0.05 * i;
        ResponsePoint pt;
        pt.Delta_p = x;
        pt.t_sq = std::exp(-(x - x0) * (x - x0));
        s.axis.push_back(x);
        s.points.push_back(pt);
    }
    const auto [x, y] = find_peak_transmission(s);
    CHECK(x == doctest::Approx(x0).epsilon(1e-3));
    CHECK(y == doctest::Approx(1.0).epsilon(1e-4));

    Spectrum mirrored;
    for (auto it = s.points.rbegin(); it != s.points.rend(); ++it) {
        auto pt = *it;
        pt.Delta_p = -pt.Delta_p;
        mirrored.axis.push_back(pt.Delta_p);
        mirrored.points.push_back(pt);
    }
    const auto [xm, ym] = find_peak_transmission(mirrored);
    CHECK(xm == doctest::Approx(-x).epsilon(1e-12));
    CHECK(ym == doctest::Approx(y).epsilon(1e-12));
}

TEST_CASE("blue/red power scan") {
    const auto p = SystemParams::reference();
    const auto powers = linspace(0.0, 55e-6, 23);
    const auto scan = power_sweep(p, blue(0.0), powers);
    REQUIRE(scan.points.size() == powers.size());
    CHECK(scan.failures() == 0);

    // Bare value up to the microwave-induced static shift of the optical cavity.
    CHECK(scan.points.front().t_sq_peak == doctest::Approx(0.0576).epsilon(1e-3));

    std::size_t imin = 0;
    for (std::size_t i = 0; i < scan.points.size(); ++i) {
        if (scan.points[i].t_sq_peak < scan.points[imin].t_sq_peak) imin = i;
    }
    CHECK(imin > 0);
    CHECK(scan.points[imin].t_sq_peak < 0.0576);
    for (std::size_t i = 1; i <= imin; ++i) CHECK(scan.points[i].t_sq_peak < scan.points[i - 1].t_sq_peak);
    for (std::size_t i = imin + 1; i < scan.points.size(); ++i) {
        CHECK(scan.points[i].t_sq_peak > scan.points[i - 1].t_sq_peak);
    }

    REQUIRE(scan.threshold.has_value());
    REQUIRE(scan.threshold_interpolated.has_value());
    CHECK(*scan.threshold > 31e-6);
    CHECK(*scan.threshold < 43e-6);
    CHECK(std::abs(*scan.threshold - *scan.threshold_interpolated) < 0.01 * *scan.threshold);

    SUBCASE("scan values equal the spectrum centers") {
        for (std::size_t i : {std::size_t{4}, std::size_t{12}, std::size_t{20}}) {
            const auto s = sweep(blue(powers[i]), 11);
            CHECK(std::abs(scan.points[i].t_sq_peak - s.center.t_sq) <= 1e-10 * s.center.t_sq);
        }
    }

    SUBCASE("without the microwave pump the bare value is exact") {
        const auto bare = power_sweep(p, blue(0.0, 0.0), {0.0, 1e-6});
        CHECK(bare.points.front().t_sq_peak == doctest::Approx(0.0576).epsilon(1e-12));
    }
}

TEST_CASE("blue/red instability threshold") {
    const auto p = SystemParams::reference();
    const auto scan = power_sweep(p, blue(0.0), linspace(10e-6, 100e-6, 10));
    REQUIRE(scan.instability_threshold.has_value());
    const double thr = *scan.instability_threshold;
    CHECK(thr > 40e-6);
    CHECK(thr < 80e-6);
    const auto below = power_sweep(p, blue(0.0), {0.99 * thr});
    const auto above = power_sweep(p, blue(0.0), {1.01 * thr});
    CHECK(below.points[0].stable);
    CHECK_FALSE(above.points[0].stable);
}

TEST_CASE("red/red power scan stays below unity") {
    const auto p = SystemParams::reference();
    const auto scan = power_sweep(p, red(0.0), linspace(0.0, 3e-3, 31));
    CHECK(scan.failures() == 0);
    for (std::size_t i = 1; i < scan.points.size(); ++i) {
        CHECK(scan.points[i].t_sq_peak > scan.points[i - 1].t_sq_peak);
        CHECK(scan.points[i].t_sq_peak <= 1.0);
        CHECK(scan.points[i].stable);
    }
    CHECK_FALSE(scan.threshold.has_value());
    CHECK_FALSE(scan.instability_threshold.has_value());
}

TEST_CASE("power scan records solver failures and continues") {
    const auto p = SystemParams::reference();
    SweepOptions o;
    o.solver.max_iterations = 1;
    const auto scan = power_sweep(p, red(0.0), {1e-3, 2e-3, 3e-3}, o);
    CHECK(scan.points.size() == 3);
    CHECK(scan.failures() == 3);
    for (const auto& pt : scan.points) {
        CHECK(std::isnan(pt.t_sq_peak));
        CHECK(std::isnan(pt.margin));
        CHECK_FALSE(pt.error.empty());
        CHECK(pt.residual > 0.0);
    }
    CHECK_THROWS_AS(power_sweep(p, red(0.0), {}), DomainError);
    CHECK_THROWS_AS(power_sweep(p, red(0.0), {2e-3, 1e-3}), DomainError);
}

TEST_CASE("spectra do not depend on the thread count") {
    const auto p = SystemParams::reference();
    const auto axis = AxisSpec::around_cavity(p);
    SweepOptions one;
    one.threads = 1;
    SweepOptions many;
    many.threads = 7;
    const auto a = spectrum_sweep(p, red(2e-3), axis, one);
    const auto b = spectrum_sweep(p, red(2e-3), axis, many);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        CHECK(bitwise_equal(a.points[i].t.real(), b.points[i].t.real()));
        CHECK(bitwise_equal(a.points[i].t.imag(), b.points[i].t.imag()));
        CHECK(bitwise_equal(a.points[i].phase, b.points[i].phase));
    }
}

TEST_CASE("regime names") {
    CHECK(to_string(Regime::bare) == "BARE");
    CHECK(to_string(Regime::eit) == "EIT");
    CHECK(to_string(Regime::eia) == "EIA");
    CHECK(to_string(Regime::amplification) == "AMPLIFICATION");
}
