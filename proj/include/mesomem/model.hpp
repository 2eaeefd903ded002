#pragma once

// Scalar kernel of the two-phase model: parameters, the eps-dependent
// double well, the optimal phase threshold, the Modica-Mortola antiderivative
// H and the closed-form optimal transition profile.

#include <cmath>
#include <numbers>
#include <string>

#include "mesomem/error.hpp"

namespace mesomem {

/// Phase indicator value: 0 or 1.
using Phase = unsigned char;

struct ModelParams {
    double c = 0.0;      ///< line-tension strength, c >= 0
    double sigma = 1.0;  ///< gradient weight; the closed forms below assume sigma = 1
    double eps = 0.1;    ///< length-scale parameter

    /// Throws DomainError unless c >= 0, sigma > 0, eps > 0 and c*sqrt(eps) < 1.
    void validate() const {
        if (!(eps > 0.0) || !std::isfinite(eps))
            throw DomainError("eps must be positive and finite");
        if (!(sigma > 0.0) || !std::isfinite(sigma))
            throw DomainError("sigma must be positive and finite");
        if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("c must be nonnegative");
        if (c * std::sqrt(eps) >= 1.0)
            throw DomainError("c*sqrt(eps) = " + std::to_string(c * std::sqrt(eps)) +
                              " must be < 1");
    }

    ModelParams with_eps(double e) const {
        ModelParams p = *this;
        p.eps = e;
        return p;
    }
};

struct DerivedConstants {
    double lambda = 1.0;  ///< 1 / (1 - c sqrt(eps))
    double a0 = 1.0;      ///< well coefficient of phase 0, equals lambda
    double a1 = 1.0;      ///< well coefficient of phase 1
    double a_star = 1.0;  ///< phase threshold 2 / (lambda + 1)

    double a(Phase chi) const noexcept { return chi ? a1 : a0; }
};

inline DerivedConstants derive_constants(const ModelParams& p) {
    p.validate();
    DerivedConstants d;
    d.lambda = 1.0 / (1.0 - p.c * std::sqrt(p.eps));
    d.a0 = d.lambda;
    d.a1 = 1.0;
    d.a_star = 2.0 / (d.lambda + 1.0);
    return d;
}

/// (1 - a(chi) M)^2 / eps^2. Zero exactly at M = 1/a(chi).
inline double well_potential(double M, Phase chi, const ModelParams& p,
                             const DerivedConstants& d) {
    const double r = 1.0 - d.a(chi) * M;
    return r * r / (p.eps * p.eps);
}

inline double well_potential(double M, Phase chi, const ModelParams& p) {
    return well_potential(M, chi, p, derive_constants(p));
}

/// Optimal phase for mass M: 1 iff M > a_star. M == a_star maps to phase 0.
inline Phase threshold_phase(double M, const DerivedConstants& d) noexcept {
    return M > d.a_star ? Phase{1} : Phase{0};
}

/// c^2 / (sqrt 2 (2 - c sqrt eps)): energy of one optimal 1D transition, equal to H(1).
inline double transition_energy(const ModelParams& p) {
    p.validate();
    const double cs = p.c * std::sqrt(p.eps);
    return p.c * p.c / (std::numbers::sqrt2 * (2.0 - cs));
}

/// c^2 / sqrt 8: the sharp-interface line tension.
inline double line_tension(double c) noexcept { return c * c / (2.0 * std::numbers::sqrt2); }

/// Relative gap |E - limit| / limit, or the absolute gap when the limit vanishes.
inline double energy_gap(double energy, double limit) {
    return limit > 0.0 ? std::abs(energy - limit) / limit : std::abs(energy - limit);
}

/// Antiderivative of (sqrt 2/eps)|1 - a(threshold(s)) s|, normalized by H(1/lambda) = 0.
inline double antiderivative_H(double t, const ModelParams& p) {
    const DerivedConstants d = derive_constants(p);
    const double s2e = std::numbers::sqrt2 * p.eps;
    const double inv_lambda = 1.0 / d.lambda;
    if (t < inv_lambda) {
        const double u = 1.0 - d.lambda * t;
        return -u * u / (s2e * d.lambda);
    }
    if (t <= d.a_star) {
        const double u = 1.0 - d.lambda * t;
        return u * u / (s2e * d.lambda);
    }
    const double h1 = transition_energy(p);
    const double u = 1.0 - t;
    if (t <= 1.0) return h1 - u * u / s2e;
    return h1 + u * u / s2e;
}

struct ProfileValue {
    double q = 1.0;
    double slope = 0.0;
    /// 1 - a(threshold(q)) q, evaluated without cancellation.
    double well_residual = 0.0;
};

/// Optimal transition profile q_eps(r) from 1/lambda (r -> -inf) to 1 (r -> +inf),
/// q(0) = a_star, together with q' and the well residual. |r| > 60 eps returns the
/// far-field constants.
inline ProfileValue optimal_profile(double r, const ModelParams& p) {
    const DerivedConstants d = derive_constants(p);
    const double cs = p.c * std::sqrt(p.eps);
    const double amp = cs / (2.0 - cs);
    const double peak_slope = p.c * std::numbers::sqrt2 / (std::sqrt(p.eps) * (2.0 - cs));
    const double cutoff = 60.0 * p.eps;
    ProfileValue v;
    if (r <= 0.0) {
        if (r < -cutoff) {
            v.q = 1.0 - cs;
            v.slope = 0.0;
            v.well_residual = 0.0;
            return v;
        }
        const double e = std::exp(std::numbers::sqrt2 * r * d.lambda / p.eps);
        v.q = (1.0 - cs) + (1.0 - cs) * amp * e;
        v.slope = peak_slope * e;
        v.well_residual = -amp * e;
        return v;
    }
    if (r > cutoff) return v;
    const double e = std::exp(-std::numbers::sqrt2 * r / p.eps);
    v.q = 1.0 - amp * e;
    v.slope = peak_slope * e;
    v.well_residual = amp * e;
    return v;
}

}  // namespace mesomem
