#pragma once

// Closed planar curves sampled at uniform arclength, and the ray offset map.
//
// Conventions: (a,b)^perp = (-b, a); nu = (gamma')^perp; kappa = -gamma''.nu.
// A counterclockwise circle has inward normal and kappa = -1/R.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "mesomem/error.hpp"

namespace mesomem {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2& operator+=(Vec2 o) noexcept { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) noexcept { x -= o.x; y -= o.y; return *this; }
    Vec2& operator*=(double s) noexcept { x *= s; y *= s; return *this; }
    friend Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator-(Vec2 a) noexcept { return {-a.x, -a.y}; }
    friend Vec2 operator*(double s, Vec2 a) noexcept { return {s * a.x, s * a.y}; }
    friend Vec2 operator*(Vec2 a, double s) noexcept { return {s * a.x, s * a.y}; }
    friend Vec2 operator/(Vec2 a, double s) noexcept { return {a.x / s, a.y / s}; }
    friend bool operator==(Vec2 a, Vec2 b) noexcept { return a.x == b.x && a.y == b.y; }
};

inline double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) noexcept { return std::hypot(a.x, a.y); }
inline Vec2 perp(Vec2 a) noexcept { return {-a.y, a.x}; }

// --- periodic stencils --------------------------------------------------------

inline std::size_t wrap(std::ptrdiff_t i, std::size_t n) noexcept {
    const auto m = static_cast<std::ptrdiff_t>(n);
    return static_cast<std::size_t>(((i % m) + m) % m);
}

/// Fourth-order central first derivative of periodic samples with spacing h.
template <class T>
std::vector<T> periodic_derivative(std::span<const T> f, double h) {
    const std::size_t n = f.size();
    std::vector<T> d(n);
    const double w = 1.0 / (12.0 * h);
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::ptrdiff_t>(i);
        d[i] = w * ((f[wrap(k - 2, n)] - f[wrap(k + 2, n)]) + 8.0 * (f[wrap(k + 1, n)] - f[wrap(k - 1, n)]));
    }
    return d;
}

/// Fourth-order central second derivative of periodic samples with spacing h.
template <class T>
std::vector<T> periodic_second_derivative(std::span<const T> f, double h) {
    const std::size_t n = f.size();
    std::vector<T> d(n);
    const double w = 1.0 / (12.0 * h * h);
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::ptrdiff_t>(i);
        d[i] = w * (-1.0 * (f[wrap(k - 2, n)] + f[wrap(k + 2, n)]) +
                    16.0 * (f[wrap(k - 1, n)] + f[wrap(k + 1, n)]) - 30.0 * f[i]);
    }
    return d;
}

/// Cubic Lagrange interpolation of periodic samples f_i = f(i h) at arbitrary s.
template <class T>
T periodic_interpolate(std::span<const T> f, double h, double s) {
    const std::size_t n = f.size();
    const double u = s / h;
    const double fl = std::floor(u);
    const double x = u - fl;
    const auto i = static_cast<std::ptrdiff_t>(fl);
    // nodes at -1, 0, 1, 2 relative to i
    const double w0 = -x * (x - 1.0) * (x - 2.0) / 6.0;
    const double w1 = (x + 1.0) * (x - 1.0) * (x - 2.0) / 2.0;
    const double w2 = -(x + 1.0) * x * (x - 2.0) / 2.0;
    const double w3 = (x + 1.0) * x * (x - 1.0) / 6.0;
    return w0 * f[wrap(i - 1, n)] + w1 * f[wrap(i, n)] + w2 * f[wrap(i + 1, n)] +
           w3 * f[wrap(i + 2, n)];
}

// --- curve --------------------------------------------------------------------

class PeriodicCurve {
public:
    PeriodicCurve() = default;

    /// Takes points already at uniform arclength s_i = i L / n.
    static PeriodicCurve from_samples(std::vector<Vec2> points, double length) {
        if (points.size() < 8) throw DegenerateCurve("curve needs at least 8 samples");
        if (!(length > 0.0) || !std::isfinite(length))
            throw DegenerateCurve("curve length must be positive");
        PeriodicCurve c;
        c.points_ = std::move(points);
        c.length_ = length;
        const double h = c.spacing();
        std::span<const Vec2> pts(c.points_);
        c.velocity_ = periodic_derivative(pts, h);
        c.acceleration_ = periodic_second_derivative(pts, h);
        const std::size_t n = c.points_.size();
        c.tangent_.resize(n);
        c.normal_.resize(n);
        c.curvature_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double sp = norm(c.velocity_[i]);
            if (!(sp > 0.0)) throw DegenerateCurve("zero tangent at node " + std::to_string(i));
            c.tangent_[i] = c.velocity_[i] / sp;
            c.normal_[i] = perp(c.tangent_[i]);
            c.curvature_[i] = -dot(c.acceleration_[i], c.normal_[i]);
        }
        return c;
    }

    std::size_t size() const noexcept { return points_.size(); }
    double length() const noexcept { return length_; }
    double spacing() const noexcept { return length_ / static_cast<double>(points_.size()); }
    double s(std::size_t i) const noexcept { return static_cast<double>(i) * spacing(); }

    const std::vector<Vec2>& points() const noexcept { return points_; }
    /// Unit tangent gamma'/|gamma'|.
    const std::vector<Vec2>& tangent() const noexcept { return tangent_; }
    const std::vector<Vec2>& normal() const noexcept { return normal_; }
    const std::vector<double>& curvature() const noexcept { return curvature_; }
    /// Raw difference-stencil derivatives of the samples.
    const std::vector<Vec2>& velocity() const noexcept { return velocity_; }
    const std::vector<Vec2>& acceleration() const noexcept { return acceleration_; }

    Vec2 point_at(double s) const { return periodic_interpolate(std::span<const Vec2>(points_), spacing(), s); }
    double curvature_at(double s) const {
        return periodic_interpolate(std::span<const double>(curvature_), spacing(), s);
    }
    Vec2 normal_at(double s) const {
        const Vec2 v = periodic_interpolate(std::span<const Vec2>(normal_), spacing(), s);
        return v / norm(v);
    }

    /// Same samples with index k moved to index 0 (arclength origin moved to s_k).
    PeriodicCurve rotated(std::size_t k) const {
        std::vector<Vec2> p(points_.size());
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = points_[(i + k) % p.size()];
        return from_samples(std::move(p), length_);
    }

    /// Periodic trapezoid quadrature of per-node values.
    double integrate(std::span<const double> f) const {
        double s = 0.0;
        for (double v : f) s += v;
        return s * spacing();
    }

private:
    std::vector<Vec2> points_;
    double length_ = 0.0;
    std::vector<Vec2> velocity_, acceleration_, tangent_, normal_;
    std::vector<double> curvature_;
};

// --- resampling -----------------------------------------------------------------

namespace detail {

inline constexpr int kGaussPoints = 10;
using Gauss = boost::math::quadrature::gauss<double, kGaussPoints>;

// Periodic cubic spline through closed polyline knots, chord-length parametrized.
class ClosedSpline {
public:
    explicit ClosedSpline(std::span<const Vec2> pts) : pts_(pts.begin(), pts.end()) {
        const std::size_t n = pts_.size();
        knots_.resize(n + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = norm(pts_[(i + 1) % n] - pts_[i]);
            if (!(d > 0.0)) throw DegenerateCurve("repeated point at index " + std::to_string(i));
            knots_[i + 1] = knots_[i] + d;
        }
        std::vector<double> xs(n), ys(n);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = pts_[i].x;
            ys[i] = pts_[i].y;
        }
        mx_ = second_derivatives(xs);
        my_ = second_derivatives(ys);
        seg_len_.resize(n);
        cum_.resize(n + 1, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            seg_len_[k] = arc(k, knots_[k + 1] - knots_[k]);
            cum_[k + 1] = cum_[k] + seg_len_[k];
        }
    }

    std::size_t segments() const noexcept { return pts_.size(); }
    double length() const noexcept { return cum_.back(); }
    /// Arclength from the start to knot k.
    double arclength_at_knot(std::size_t k) const noexcept { return cum_[k]; }

    Vec2 eval(std::size_t k, double tau) const {
        return {coord(pts_, mx_, k, tau, true, 0), coord(pts_, my_, k, tau, false, 0)};
    }
    Vec2 deriv(std::size_t k, double tau) const {
        return {coord(pts_, mx_, k, tau, true, 1), coord(pts_, my_, k, tau, false, 1)};
    }
    /// Arclength along segment k from its start to local parameter tau.
    double arc(std::size_t k, double tau) const {
        if (tau <= 0.0) return 0.0;
        return Gauss::integrate([&](double u) { return norm(deriv(k, u)); }, 0.0, tau);
    }

    /// Point at arclength position sigma in [0, length).
    Vec2 at_arclength(double sigma, std::size_t& seg_hint) const {
        const std::size_t n = pts_.size();
        std::size_t k = std::min(seg_hint, n - 1);
        while (k + 1 < n && cum_[k + 1] <= sigma) ++k;
        while (k > 0 && cum_[k] > sigma) --k;
        seg_hint = k;
        const double target = sigma - cum_[k];
        const double dk = knots_[k + 1] - knots_[k];
        double tau = dk * target / seg_len_[k];
        for (int it = 0; it < 50; ++it) {
            const double f = arc(k, tau) - target;
            const double step = f / norm(deriv(k, tau));
            tau = std::clamp(tau - step, 0.0, dk);
            if (std::abs(step) <= 1e-15 * dk) break;
        }
        return eval(k, tau);
    }

private:
    std::vector<double> second_derivatives(const std::vector<double>& y) const {
        // Cyclic tridiagonal system, solved by Sherman-Morrison on top of Thomas.
        const std::size_t n = y.size();
        std::vector<double> a(n), b(n), c(n), r(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double hl = i == 0 ? knots_[n] - knots_[n - 1] : knots_[i] - knots_[i - 1];
            const double hr = knots_[i + 1] - knots_[i];
            a[i] = hl;
            b[i] = 2.0 * (hl + hr);
            c[i] = hr;
            r[i] = 6.0 * ((y[(i + 1) % n] - y[i]) / hr - (y[i] - y[(i + n - 1) % n]) / hl);
        }
        const double gamma = -b[0];
        std::vector<double> bb = b;
        bb[0] -= gamma;
        bb[n - 1] -= a[0] * c[n - 1] / gamma;
        std::vector<double> u(n, 0.0);
        u[0] = gamma;
        u[n - 1] = c[n - 1];
        const std::vector<double> xs = thomas(a, bb, c, r);
        const std::vector<double> zs = thomas(a, bb, c, u);
        const double fac = (xs[0] + a[0] * xs[n - 1] / gamma) / (1.0 + zs[0] + a[0] * zs[n - 1] / gamma);
        std::vector<double> m(n);
        for (std::size_t i = 0; i < n; ++i) m[i] = xs[i] - fac * zs[i];
        return m;
    }

    static std::vector<double> thomas(const std::vector<double>& a, const std::vector<double>& b,
                                      const std::vector<double>& c, const std::vector<double>& r) {
        const std::size_t n = b.size();
        std::vector<double> cp(n), dp(n), x(n);
        cp[0] = c[0] / b[0];
        dp[0] = r[0] / b[0];
        for (std::size_t i = 1; i < n; ++i) {
            const double m = b[i] - a[i] * cp[i - 1];
            cp[i] = c[i] / m;
            dp[i] = (r[i] - a[i] * dp[i - 1]) / m;
        }
        x[n - 1] = dp[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) x[i] = dp[i] - cp[i] * x[i + 1];
        return x;
    }

    double coord(const std::vector<Vec2>& p, const std::vector<double>& m, std::size_t k, double tau,
                 bool is_x, int order) const {
        const std::size_t n = p.size();
        const double y0 = is_x ? p[k].x : p[k].y;
        const double y1 = is_x ? p[(k + 1) % n].x : p[(k + 1) % n].y;
        const double m0 = m[k];
        const double m1 = m[(k + 1) % n];
        const double hk = knots_[k + 1] - knots_[k];
        const double b = (y1 - y0) / hk - hk * (2.0 * m0 + m1) / 6.0;
        const double c = 0.5 * m0;
        const double d = (m1 - m0) / (6.0 * hk);
        if (order == 0) return y0 + tau * (b + tau * (c + tau * d));
        return b + tau * (2.0 * c + 3.0 * tau * d);
    }

    std::vector<Vec2> pts_;
    std::vector<double> knots_, mx_, my_, seg_len_, cum_;
};

}  // namespace detail

/// Resamples a closed polyline (last point not repeated) to n points at uniform
/// arclength of its periodic cubic spline. n = 0 keeps the input count.
inline PeriodicCurve resample_arclength(std::span<const Vec2> polyline, std::size_t n = 0) {
    if (polyline.size() < 8) throw DegenerateCurve("polyline needs at least 8 points");
    if (n == 0) n = polyline.size();
    if (n < 8) throw DegenerateCurve("resampled curve needs at least 8 samples");
    const detail::ClosedSpline spline(polyline);
    const double L = spline.length();
    if (!(L > 0.0)) throw DegenerateCurve("polyline has zero length");
    std::vector<Vec2> out(n);
    std::size_t hint = 0;
    for (std::size_t i = 0; i < n; ++i)
        out[i] = spline.at_arclength(L * static_cast<double>(i) / static_cast<double>(n), hint);
    return PeriodicCurve::from_samples(std::move(out), L);
}

/// Counterclockwise circle of radius R centered at the origin, starting at (R, 0).
inline PeriodicCurve make_circle(double R, std::size_t n) {
    if (!(R > 0.0)) throw DegenerateCurve("circle radius must be positive");
    const double L = 2.0 * std::numbers::pi * R;
    std::vector<Vec2> p(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double phi = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
        p[i] = {R * std::cos(phi), R * std::sin(phi)};
    }
    return PeriodicCurve::from_samples(std::move(p), L);
}

/// Counterclockwise ellipse with semi-axes a (x) and b (y), resampled at exact arclength.
inline PeriodicCurve make_ellipse(double a, double b, std::size_t n) {
    if (!(a > 0.0) || !(b > 0.0)) throw DegenerateCurve("ellipse semi-axes must be positive");
    if (a == b) return make_circle(a, n);
    auto speed = [&](double phi) { return std::hypot(a * std::sin(phi), b * std::cos(phi)); };
    // The trapezoid rule is spectrally accurate over a full period.
    const std::size_t nq = 1 << 14;
    double L = 0.0;
    for (std::size_t k = 0; k < nq; ++k)
        L += speed(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(nq));
    L *= 2.0 * std::numbers::pi / static_cast<double>(nq);

    std::vector<Vec2> p(n);
    double phi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            const double ds = L / static_cast<double>(n);
            const double phi0 = phi;
            double next = phi0 + ds / speed(phi0);
            for (int it = 0; it < 50; ++it) {
                const double f = detail::Gauss::integrate(speed, phi0, next) - ds;
                const double step = f / speed(next);
                next -= step;
                if (std::abs(step) < 1e-16) break;
            }
            phi = next;
        }
        p[i] = {a * std::cos(phi), b * std::sin(phi)};
    }
    return PeriodicCurve::from_samples(std::move(p), L);
}

// --- ray offset ---------------------------------------------------------------

struct RayGeometry {
    double A = 1.0;  ///< alignment nu.theta
    double B = 0.0;  ///< rotation rate theta'.theta^perp
};

/// Signed distance along the ray carrying mass coordinate m. Throws RayOverrun
/// when m exceeds the focal capacity of the ray.
inline double ray_offset(double A, double B, double m, double eps) {
    if (!(A > 0.0)) throw DomainError("ray alignment must be positive");
    const double b_tol = 1e-6 * A * A / (eps * std::max(std::abs(m), 1.0));
    const double em = eps * m;
    if (std::abs(B) < b_tol) {
        const double A3 = A * A * A;
        return em / A + B * em * em / (2.0 * A3) + B * B * em * em * em / (2.0 * A3 * A * A);
    }
    const double disc = 1.0 - 2.0 * B * em / (A * A);
    if (disc < 0.0)
        throw RayOverrun("ray overrun: 1 - 2 B eps m / A^2 = " + std::to_string(disc));
    // (A/B)(1 - sqrt(disc)) without the cancellation
    return 2.0 * em / (A * (1.0 + std::sqrt(disc)));
}

inline double ray_offset(RayGeometry g, double m, double eps) { return ray_offset(g.A, g.B, m, eps); }

/// Mass coordinate of the ray point at offset t: (A t - B t^2 / 2) / eps.
inline double ray_mass(double A, double B, double t, double eps) {
    return (A * t - 0.5 * B * t * t) / eps;
}

}  // namespace mesomem
