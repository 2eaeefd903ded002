#pragma once

// Single-curve mesoscale energies and family sums.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "mesomem/configuration.hpp"
#include "mesomem/embedding.hpp"
#include "mesomem/model.hpp"

namespace mesomem {

struct MassPair {
    double m1 = 0.0;  ///< phase-0 mass, integral of (1 - chi) M
    double m2 = 0.0;  ///< phase-1 mass, integral of chi M
};

inline MassPair phase_masses(const Configuration& Z) {
    MassPair m;
    for (std::size_t i = 0; i < Z.size(); ++i) (Z.chi()[i] ? m.m2 : m.m1) += Z.mass()[i];
    const double h = Z.curve().spacing();
    m.m1 *= h;
    m.m2 *= h;
    return m;
}

namespace detail {

// Integrand M^2/A + eps^2 |theta'|^2 M^4 / (4 A^5) at one node.
inline double reduced_distance_density(double A, double tp2, double M, double eps) {
    const double A2 = A * A;
    return M * M / A + eps * eps * tp2 * M * M * M * M / (4.0 * A2 * A2 * A);
}

}  // namespace detail

/// Reduced distance term for the mass field `mass` (one value per node).
inline double reduced_distance(const PeriodicCurve& curve, std::span<const Vec2> theta,
                               std::span<const double> mass, double eps) {
    const std::size_t n = curve.size();
    if (theta.size() != n || mass.size() != n)
        throw DomainError("theta and mass need one value per curve node");
    const std::vector<Vec2> tp = periodic_derivative(theta, curve.spacing());
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double A = dot(curve.normal()[i], theta[i]);
        if (!(A > 0.0)) throw TransversalityError(i, A);
        s += detail::reduced_distance_density(A, dot(tp[i], tp[i]), mass[i], eps);
    }
    return s * curve.spacing();
}

/// Open-curve variant on uniformly spaced samples of a polyline (trapezoid rule,
/// second-order differences with one-sided ends). Used for straight test segments.
inline double reduced_distance_open(std::span<const Vec2> points, std::span<const Vec2> theta,
                                    std::span<const double> mass, double eps) {
    const std::size_t n = points.size();
    if (n < 3 || theta.size() != n || mass.size() != n)
        throw DomainError("open curve needs >= 3 samples and matching fields");
    auto diff = [n](auto f, std::size_t i) {
        if (i == 0) return 0.5 * (-3.0 * f(0) + 4.0 * f(1) - f(2));
        if (i == n - 1) return 0.5 * (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3));
        return 0.5 * (f(i + 1) - f(i - 1));
    };
    double total_len = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) total_len += norm(points[i + 1] - points[i]);
    const double h = total_len / static_cast<double>(n - 1);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 d{diff([&](std::size_t k) { return points[k].x; }, i),
                     diff([&](std::size_t k) { return points[k].y; }, i)};
        const Vec2 nu = perp(d / norm(d));
        const Vec2 tp = Vec2{diff([&](std::size_t k) { return theta[k].x; }, i),
                             diff([&](std::size_t k) { return theta[k].y; }, i)} / h;
        const double A = dot(nu, theta[i]);
        if (!(A > 0.0)) throw TransversalityError(i, A);
        const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        s += w * detail::reduced_distance_density(A, dot(tp, tp), mass[i], eps);
    }
    return s * h;
}

/// Integral of eps^-2 (1 - a(chi) M)^2 + (sigma/2) M'^2.
inline double separation_energy(const Configuration& Z, const ModelParams& p) {
    const DerivedConstants d = derive_constants(p);
    double s = 0.0;
    for (std::size_t i = 0; i < Z.size(); ++i) {
        const double ms = Z.mass_slope()[i];
        s += well_potential(Z.mass()[i], Z.chi()[i], p, d) + 0.5 * p.sigma * ms * ms;
    }
    return s * Z.curve().spacing();
}

/// Integral of eps^-2 ((1-A)/A) a^2 M^2 + a^2 |theta'|^2 M^4 / (4 A^5), with A = nu.theta.
inline double bending_energy(const Configuration& Z, const ModelParams& p) {
    const DerivedConstants d = derive_constants(p);
    const double e2 = p.eps * p.eps;
    double s = 0.0;
    for (std::size_t i = 0; i < Z.size(); ++i) {
        const double A = Z.alignment()[i];
        const double a = d.a(Z.chi()[i]);
        const double M2 = Z.mass()[i] * Z.mass()[i];
        const Vec2 tp = Z.theta_prime()[i];
        const double A2 = A * A;
        s += a * a * ((1.0 - A) / A * M2 / e2 + dot(tp, tp) * M2 * M2 / (4.0 * A2 * A2 * A));
    }
    return s * Z.curve().spacing();
}

/// E + G.
inline double rescaled_energy(const Configuration& Z, const ModelParams& p) {
    return separation_energy(Z, p) + bending_energy(Z, p);
}

/// 2 lambda m1 + 2 m2 + eps^2 (E + G).
inline double reduced_full_energy(const Configuration& Z, const ModelParams& p) {
    const DerivedConstants d = derive_constants(p);
    const MassPair m = phase_masses(Z);
    return 2.0 * d.lambda * m.m1 + 2.0 * m.m2 + p.eps * p.eps * rescaled_energy(Z, p);
}

/// L + lambda^2 D(M^(1)) + D(M^(2)) + (sigma/2) eps^2 int M'^2, with M^(1) = (1-chi) M
/// and M^(2) = chi M.
inline double primitive_energy(const Configuration& Z, const ModelParams& p) {
    const DerivedConstants d = derive_constants(p);
    double d0 = 0.0, d1 = 0.0, grad = 0.0;
    for (std::size_t i = 0; i < Z.size(); ++i) {
        const Vec2 tp = Z.theta_prime()[i];
        const double v = detail::reduced_distance_density(Z.alignment()[i], dot(tp, tp), Z.mass()[i], p.eps);
        (Z.chi()[i] ? d1 : d0) += v;
        grad += Z.mass_slope()[i] * Z.mass_slope()[i];
    }
    const double h = Z.curve().spacing();
    return Z.curve().length() +
           h * (d.lambda * d.lambda * d0 + d1 + 0.5 * p.sigma * p.eps * p.eps * grad);
}

struct FamilyReport {
    double value = 0.0;       ///< sum of reduced_full_energy
    double separation = 0.0;  ///< sum of E
    double bending = 0.0;     ///< sum of G
    MassPair masses;
    MassPair residuals;  ///< masses - targets
    OverlapResult overlap;
};

inline FamilyReport family_energy(std::span<const Configuration> Zs, const ModelParams& p,
                                  const MassPair& targets, const EmbeddingOptions& eo = {}) {
    if (Zs.empty()) throw DomainError("family needs at least one configuration");
    FamilyReport r;
    for (const Configuration& Z : Zs) {
        r.value += reduced_full_energy(Z, p);
        r.separation += separation_energy(Z, p);
        r.bending += bending_energy(Z, p);
        const MassPair m = phase_masses(Z);
        r.masses.m1 += m.m1;
        r.masses.m2 += m.m2;
    }
    r.residuals = {r.masses.m1 - targets.m1, r.masses.m2 - targets.m2};
    r.overlap = overlap_check(Zs, p.eps, eo);
    return r;
}

}  // namespace mesomem
