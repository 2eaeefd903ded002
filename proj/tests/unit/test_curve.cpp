#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "mesomem/curve.hpp"
#include "oracles.hpp"

using namespace mesomem;

namespace {

double max_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, norm(a[i] - b[i]));
    return d;
}

}  // namespace

TEST(PeriodicStencils, FourthOrderConvergence) {
    auto err = [](std::size_t n) {
        const double h = 2.0 * std::numbers::pi / static_cast<double>(n);
        std::vector<double> f(n);
        for (std::size_t i = 0; i < n; ++i) f[i] = std::sin(3.0 * i * h);
        const auto d = periodic_derivative(std::span<const double>(f), h);
        const auto d2 = periodic_second_derivative(std::span<const double>(f), h);
        double e1 = 0.0, e2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            e1 = std::max(e1, std::abs(d[i] - 3.0 * std::cos(3.0 * i * h)));
            e2 = std::max(e2, std::abs(d2[i] + 9.0 * std::sin(3.0 * i * h)));
        }
        return std::pair{e1, e2};
    };
    const auto [a1, a2] = err(64);
    const auto [b1, b2] = err(128);
    EXPECT_NEAR(std::log2(a1 / b1), 4.0, 0.1);
    EXPECT_NEAR(std::log2(a2 / b2), 4.0, 0.1);
}

TEST(PeriodicStencils, InterpolationIsExactAtNodesAndAccurateBetween) {
    const std::size_t n = 256;
    const double h = 1.0 / static_cast<double>(n);
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = std::cos(2.0 * std::numbers::pi * i * h);
    for (std::size_t i = 0; i < n; i += 17) EXPECT_DOUBLE_EQ(periodic_interpolate(std::span<const double>(f), h, i * h), f[i]);
    for (double s : {0.0031, 0.5, 0.77777, 0.99999, -0.25, 1.25})
        EXPECT_NEAR(periodic_interpolate(std::span<const double>(f), h, s), std::cos(2.0 * std::numbers::pi * s), 1e-7);
}

TEST(PeriodicCurve, RejectsDegenerateInput) {
    EXPECT_THROW(PeriodicCurve::from_samples(std::vector<Vec2>(7, Vec2{0.0, 0.0}), 1.0), DegenerateCurve);
    std::vector<Vec2> pts(16);
    for (std::size_t i = 0; i < 16; ++i) pts[i] = {std::cos(i * 0.4), std::sin(i * 0.4)};
    EXPECT_THROW(PeriodicCurve::from_samples(pts, 0.0), DegenerateCurve);
    EXPECT_THROW(PeriodicCurve::from_samples(std::vector<Vec2>(16, Vec2{1.0, 1.0}), 1.0), DegenerateCurve);
    EXPECT_THROW(resample_arclength(std::vector<Vec2>(16, Vec2{1.0, 1.0})), DegenerateCurve);
    EXPECT_THROW(resample_arclength(std::vector<Vec2>(5, Vec2{1.0, 1.0})), DegenerateCurve);
    EXPECT_THROW(make_circle(0.0, 64), DegenerateCurve);
    EXPECT_THROW(make_ellipse(1.0, -1.0, 64), DegenerateCurve);
}

TEST(PeriodicCurve, UnitCircleGeometry) {
    const PeriodicCurve c = make_circle(1.0, 512);
    EXPECT_NEAR(c.length(), 2.0 * std::numbers::pi, 1e-8);
    for (std::size_t i = 0; i < c.size(); ++i) {
        EXPECT_NEAR(c.curvature()[i], -1.0, 1e-6);
        EXPECT_NEAR(norm(c.velocity()[i]), 1.0, 1e-6);
        EXPECT_EQ(dot(c.tangent()[i], c.normal()[i]), 0.0);
        EXPECT_NEAR(norm(c.normal()[i]), 1.0, 1e-15);
        // inward normal
        EXPECT_NEAR(dot(c.normal()[i], c.points()[i]), -1.0, 1e-6);
    }
    EXPECT_NEAR(c.integrate(c.curvature()), -2.0 * std::numbers::pi, 1e-6);
}

TEST(PeriodicCurve, RoundEllipseIsCircle) {
    const PeriodicCurve a = make_ellipse(1.0, 1.0, 256), b = make_circle(1.0, 256);
    EXPECT_EQ(a.length(), b.length());
    EXPECT_LT(max_distance(a.points(), b.points()), 1e-15);
}

TEST(PeriodicCurve, EllipseMatchesAnalyticIntegrals) {
    const PeriodicCurve e = make_ellipse(1.0, 0.6, 1024);
    EXPECT_NEAR(e.length(), oracle::ellipse_perimeter(1.0, 0.6), 1e-12);
    std::vector<double> k2(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) k2[i] = e.curvature()[i] * e.curvature()[i];
    const double ref = oracle::ellipse_kappa2(1.0, 0.6);
    EXPECT_NEAR(e.integrate(k2) / ref, 1.0, 1e-5);
    // self-convergence against a finer sampling
    const PeriodicCurve f = make_ellipse(1.0, 0.6, 8192);
    std::vector<double> f2(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) f2[i] = f.curvature()[i] * f.curvature()[i];
    EXPECT_NEAR(e.integrate(k2) / f.integrate(f2), 1.0, 1e-5);
    for (double kappa : e.curvature()) EXPECT_LT(kappa, 0.0);
    EXPECT_NEAR(e.integrate(e.curvature()), -2.0 * std::numbers::pi, 1e-6);
    for (const Vec2& v : e.velocity()) EXPECT_NEAR(norm(v), 1.0, 1e-6);
}

TEST(ResampleArclength, IdempotentOnUniformSamples) {
    for (const PeriodicCurve& c : {make_circle(1.0, 512), make_ellipse(1.0, 0.6, 1024)}) {
        const PeriodicCurve r = resample_arclength(c.points(), c.size());
        EXPECT_LT(max_distance(r.points(), c.points()), 1e-10);
        EXPECT_NEAR(r.length(), c.length(), 1e-9);
    }
}

TEST(ResampleArclength, NonUniformPolylineBecomesUniform) {
    std::vector<Vec2> pts;
    for (int i = 0; i < 600; ++i) {
        const double u = i / 600.0;
        const double phi = 2.0 * std::numbers::pi * (u + 0.08 * std::sin(2.0 * std::numbers::pi * u));
        pts.push_back({2.0 * std::cos(phi), 2.0 * std::sin(phi)});
    }
    const PeriodicCurve c = resample_arclength(pts, 512);
    EXPECT_NEAR(c.length(), 4.0 * std::numbers::pi, 1e-8);
    for (std::size_t i = 0; i < c.size(); ++i) {
        EXPECT_NEAR(norm(c.velocity()[i]), 1.0, 1e-6);
        EXPECT_NEAR(c.curvature()[i], -0.5, 1e-6);
    }
}

TEST(PeriodicCurve, RotatedMovesOrigin) {
    const PeriodicCurve c = make_ellipse(1.0, 0.6, 256);
    const PeriodicCurve r = c.rotated(10);
    EXPECT_EQ(r.points()[0].x, c.points()[10].x);
    EXPECT_EQ(r.points()[0].y, c.points()[10].y);
    EXPECT_DOUBLE_EQ(r.curvature()[5], c.curvature()[15]);
}

TEST(PeriodicCurve, EvaluationBetweenNodes) {
    const PeriodicCurve c = make_circle(1.0, 1024);
    for (double s : {0.1234, 1.0, 3.0, 6.2}) {
        const Vec2 p = c.point_at(s);
        EXPECT_NEAR(p.x, std::cos(s), 1e-9);
        EXPECT_NEAR(p.y, std::sin(s), 1e-9);
        EXPECT_NEAR(c.curvature_at(s), -1.0, 1e-6);
        const Vec2 nu = c.normal_at(s);
        EXPECT_NEAR(nu.x, -std::cos(s), 1e-8);
    }
}

TEST(RayOffset, Examples) {
    EXPECT_NEAR(ray_offset(1.0, 0.0, 1.0, 0.1), 0.1, 1e-15);
    EXPECT_NEAR(ray_offset(1.0, 1.0, 1.0, 0.1), 1.0 - std::sqrt(0.8), 1e-15);
    EXPECT_NEAR(ray_offset(1.0, 1.0, 1.0, 0.1), 0.1055728, 1e-7);
    EXPECT_NEAR(ray_offset(1.0, 1.0, -1.0, 0.1), 1.0 - std::sqrt(1.2), 1e-15);
    EXPECT_NEAR(ray_offset(1.0, 1.0, -1.0, 0.1), -0.0954451, 1e-7);
    EXPECT_EQ(ray_offset(0.7, 0.3, 0.0, 0.1), 0.0);
    EXPECT_NEAR(ray_offset(RayGeometry{1.0, 1.0}, 1.0, 0.1), 0.1055728, 1e-7);
}

TEST(RayOffset, OddInMassWhenRaysAreParallel) {
    for (double m : {0.1, 0.7, 3.0}) EXPECT_EQ(ray_offset(0.6, 0.0, -m, 0.05), -ray_offset(0.6, 0.0, m, 0.05));
}

TEST(RayOffset, Errors) {
    EXPECT_THROW(ray_offset(1.0, 1.0, 10.0, 0.1), RayOverrun);
    EXPECT_THROW(ray_offset(0.0, 0.0, 1.0, 0.1), DomainError);
    EXPECT_THROW(ray_offset(-0.5, 0.0, 1.0, 0.1), DomainError);
    EXPECT_NO_THROW(ray_offset(1.0, 1.0, 5.0, 0.1));  // discriminant exactly 0
}

TEST(RayMass, Examples) {
    EXPECT_NEAR(ray_mass(1.0, 1.0, ray_offset(1.0, 1.0, 1.0, 0.1), 0.1), 1.0, 1e-12);
    EXPECT_NEAR(ray_mass(1.0, 1.0, 0.1055728, 0.1), 1.0, 1e-6);
    EXPECT_NEAR(ray_mass(1.0, 0.0, 0.1, 0.1), 1.0, 1e-15);
    EXPECT_EQ(ray_mass(0.3, 2.0, 0.0, 0.1), 0.0);
}

// Both branches around |B| = b_tol = 1e-6 A^2 / (eps max(|m|, 1)).
TEST(RayOffset, BranchesAgreeAtThreshold) {
    for (double A : {0.2, 0.5, 1.0})
        for (double eps : {1e-3, 0.1, 1.0})
            for (double m : {-2.0, -0.3, 0.5, 4.0}) {
                const double b_tol = 1e-6 * A * A / (eps * std::max(std::abs(m), 1.0));
                for (double sign : {-1.0, 1.0}) {
                    const double below = ray_offset(A, sign * b_tol * (1.0 - 1e-9), m, eps);
                    const double above = ray_offset(A, sign * b_tol * (1.0 + 1e-9), m, eps);
                    EXPECT_NEAR(below, above, 1e-12 * std::max(std::abs(above), 1e-300) + 1e-300);
                    // closed form in the textbook arrangement, far from cancellation here
                    const double B = sign * b_tol * (1.0 + 1e-9);
                    const double textbook = (A / B) * (1.0 - std::sqrt(1.0 - 2.0 * B * eps * m / (A * A)));
                    EXPECT_NEAR(above, textbook, 1e-6 * std::abs(textbook));
                }
            }
}

TEST(RayOffset, RoundtripSweep) {
    oracle::Random rng(17);
    int count = 0;
    double worst = 0.0;
    while (count < 10000) {
        const double A = rng.uniform(0.05, 1.0);
        const double eps = std::pow(10.0, rng.uniform(-4.0, 0.0));
        const double m = rng.uniform(-5.0, 5.0);
        const double b_tol = 1e-6 * A * A / (eps * std::max(std::abs(m), 1.0));
        double B;
        switch (count % 4) {
            case 0: B = b_tol * rng.uniform(0.5, 2.0) * (rng.coin() ? 1 : -1); break;
            case 1: B = rng.uniform(-1.0, 1.0) * b_tol; break;
            default: B = rng.uniform(-5.0, 5.0);
        }
        // keep inside the focal capacity
        if (1.0 - 2.0 * B * eps * m / (A * A) < 0.01) continue;
        const double t = ray_offset(A, B, m, eps);
        worst = std::max(worst, std::abs(ray_mass(A, B, t, eps) - m));
        ++count;
    }
    EXPECT_LT(worst, 1e-12);
}
