#pragma once

// Recovery sequences for a phase-decorated closed curve: bump perturbations of the
// curve restore the per-phase masses lost in the transition layers, and the
// optimal profile supplies the mass per ray.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "mesomem/embedding.hpp"
#include "mesomem/energy.hpp"

namespace mesomem {

/// Arclength interval [begin, end); end may exceed L to wrap around.
struct Arc {
    double begin = 0.0;
    double end = 0.0;
    double length() const noexcept { return end - begin; }
};

class PhaseCurve {
public:
    PhaseCurve() = default;

    /// chi = 1 on the given arcs (positions modulo L), 0 elsewhere. If a jump lies
    /// at s = 0 the arclength origin is moved to a node inside the first phase arc.
    static PhaseCurve from_arcs(const PeriodicCurve& curve, const std::vector<Arc>& phase1) {
        const double L = curve.length();
        PhaseCurve pc;
        pc.curve_ = curve;
        std::vector<Arc> arcs;
        for (Arc a : phase1) {
            if (!(a.end > a.begin)) throw DomainError("phase arc must have end > begin");
            if (a.length() >= L) {
                arcs = {{0.0, L}};
                break;
            }
            const double b = std::fmod(std::fmod(a.begin, L) + L, L);
            arcs.push_back({b, b + a.length()});
        }
        if (arcs.size() == 1 && arcs[0].length() >= L) return uniform(curve, 1);
        std::sort(arcs.begin(), arcs.end(), [](Arc x, Arc y) { return x.begin < y.begin; });
        for (std::size_t k = 0; k + 1 < arcs.size(); ++k)
            if (arcs[k].end >= arcs[k + 1].begin) throw DomainError("phase arcs overlap or touch");
        if (arcs.size() > 1 && arcs.back().end >= arcs.front().begin + L)
            throw DomainError("phase arcs overlap or touch");
        for (const Arc& a : arcs) {
            pc.jumps_.push_back(a.begin);
            pc.jumps_.push_back(std::fmod(a.end, L));
        }
        std::sort(pc.jumps_.begin(), pc.jumps_.end());
        pc.phase1_ = arcs;
        if (!pc.jumps_.empty()) {
            const double gap = pc.min_jump_gap();
            double d0 = L;
            for (double j : pc.jumps_) d0 = std::min({d0, j, L - j});
            if (d0 < gap / 4.0) {
                const double mid = 0.5 * (pc.jumps_[0] + pc.jumps_[1]);
                const auto k = static_cast<std::size_t>(std::llround(mid / curve.spacing())) % curve.size();
                pc.shift_origin(k);
            }
        }
        pc.assign_nodes();
        return pc;
    }

    static PhaseCurve uniform(const PeriodicCurve& curve, Phase value) {
        PhaseCurve pc;
        pc.curve_ = curve;
        pc.constant_ = value;
        if (value) pc.phase1_ = {{0.0, curve.length()}};
        pc.assign_nodes();
        return pc;
    }

    const PeriodicCurve& curve() const noexcept { return curve_; }
    const std::vector<Phase>& chi() const noexcept { return chi_; }
    /// Sorted jump positions in [0, L).
    const std::vector<double>& jumps() const noexcept { return jumps_; }
    /// Arclength of the input curve that became s = 0.
    double origin_shift() const noexcept { return shift_; }

    Phase phase_at(double s) const {
        if (jumps_.empty()) return constant_;
        const double L = curve_.length();
        s = std::fmod(std::fmod(s, L) + L, L);
        for (const Arc& a : phase1_)
            if ((s >= a.begin && s < a.end) || (s + L >= a.begin && s + L < a.end)) return 1;
        return 0;
    }

    /// Periodic arc distance to the nearest jump, positive in phase 1; +-inf without jumps.
    double signed_distance(double s) const {
        const double inf = std::numeric_limits<double>::infinity();
        if (jumps_.empty()) return constant_ ? inf : -inf;
        const double L = curve_.length();
        s = std::fmod(std::fmod(s, L) + L, L);
        double d = L;
        for (double j : jumps_) {
            const double x = std::abs(s - j);
            d = std::min(d, std::min(x, L - x));
        }
        return phase_at(s) ? d : -d;
    }

    double min_jump_gap() const {
        if (jumps_.size() < 2) return curve_.length();
        double g = curve_.length() - jumps_.back() + jumps_.front();
        for (std::size_t k = 0; k + 1 < jumps_.size(); ++k) g = std::min(g, jumps_[k + 1] - jumps_[k]);
        return g;
    }

    /// Maximal arcs of one phase, as [begin, end) with end possibly beyond L.
    std::vector<Arc> arcs(Phase value) const {
        const double L = curve_.length();
        if (jumps_.empty()) {
            if (value != constant_) return {};
            return {{0.0, L}};
        }
        std::vector<Arc> out;
        for (std::size_t k = 0; k < jumps_.size(); ++k) {
            const double b = jumps_[k];
            const double e = k + 1 < jumps_.size() ? jumps_[k + 1] : jumps_[0] + L;
            if (phase_at(0.5 * (b + e)) == value) out.push_back({b, e});
        }
        return out;
    }

    double phase_length(Phase value) const {
        double s = 0.0;
        for (const Arc& a : arcs(value)) s += a.length();
        return s;
    }

private:
    void shift_origin(std::size_t k) {
        const double L = curve_.length();
        const double sh = static_cast<double>(k) * curve_.spacing();
        curve_ = curve_.rotated(k);
        shift_ = sh;
        for (double& j : jumps_) j = std::fmod(j - sh + L, L);
        std::sort(jumps_.begin(), jumps_.end());
        for (Arc& a : phase1_) {
            double b = std::fmod(a.begin - sh + L, L);
            a = {b, b + a.length()};
        }
    }

    void assign_nodes() {
        chi_.resize(curve_.size());
        for (std::size_t i = 0; i < chi_.size(); ++i) chi_[i] = phase_at(curve_.s(i));
    }

    PeriodicCurve curve_;
    std::vector<Phase> chi_;
    std::vector<double> jumps_;
    std::vector<Arc> phase1_;
    Phase constant_ = 1;
    double shift_ = 0.0;
};

struct LimitEnergy {
    double elastica_quarter = 0.0;  ///< (1/4) int kappa^2
    double elastica_half = 0.0;     ///< (1/2) int kappa^2
    double line_tension = 0.0;      ///< (c^2 / sqrt 8) * number of jumps

    double quarter_total() const noexcept { return elastica_quarter + line_tension; }
    double half_total() const noexcept { return elastica_half + line_tension; }
};

inline LimitEnergy limit_energy_curve(const PhaseCurve& pc, const ModelParams& p) {
    std::vector<double> k2(pc.curve().size());
    for (std::size_t i = 0; i < k2.size(); ++i) k2[i] = pc.curve().curvature()[i] * pc.curve().curvature()[i];
    const double ik2 = pc.curve().integrate(k2);
    return {0.25 * ik2, 0.5 * ik2, line_tension(p.c) * static_cast<double>(pc.jumps().size())};
}

// --- bumps ----------------------------------------------------------------------

/// amplitude * exp(1 - 1/(1 - x^2)), x = (s - center)/half_width, periodic in L.
struct Bump {
    bool active = false;
    double center = 0.0;
    double half_width = 0.0;
    double amplitude = 0.0;
    double period = 0.0;

    double offset(double s) const noexcept {
        double d = std::fmod(s - center, period);
        if (d < -0.5 * period) d += period;
        if (d >= 0.5 * period) d -= period;
        return d / half_width;
    }
    double value(double s) const noexcept {
        if (!active) return 0.0;
        const double x = offset(s);
        if (std::abs(x) >= 1.0) return 0.0;
        return amplitude * std::exp(1.0 - 1.0 / (1.0 - x * x));
    }
    double slope(double s) const noexcept {
        if (!active) return 0.0;
        const double x = offset(s);
        if (std::abs(x) >= 1.0) return 0.0;
        const double u = 1.0 - x * x;
        return amplitude * std::exp(1.0 - 1.0 / u) * (-2.0 * x / (u * u)) / half_width;
    }
    double peak() const noexcept { return active ? std::abs(amplitude) : 0.0; }
    Arc support() const noexcept { return {center - half_width, center + half_width}; }
};

struct PerturbationFields {
    Bump phase0;  ///< supported in the delta-shrunk phase-0 set
    Bump phase1;  ///< supported in the delta-shrunk phase-1 set
    double delta = 0.0;

    const Bump& rho0() const {
        if (!phase0.active) throw DomainError("no phase-0 set: the phase-0 bump is undefined");
        return phase0;
    }
    const Bump& rho1() const {
        if (!phase1.active) throw DomainError("no phase-1 set: the phase-1 bump is undefined");
        return phase1;
    }
    double displacement(double r, double t, double s) const noexcept {
        return r * phase0.value(s) + t * phase1.value(s);
    }
    double displacement_slope(double r, double t, double s) const noexcept {
        return r * phase0.slope(s) + t * phase1.slope(s);
    }
};

namespace detail {

// Composite Gauss-Legendre over [a, b] with pieces no wider than max_piece.
template <class F>
double composite_gauss(F&& f, double a, double b, double max_piece) {
    if (!(b > a)) return 0.0;
    const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / max_piece)));
    const double w = (b - a) / static_cast<double>(pieces);
    double s = 0.0;
    for (std::size_t k = 0; k < pieces; ++k) {
        const double lo = a + w * static_cast<double>(k);
        s += Gauss::integrate(f, lo, lo + w);
    }
    return s;
}

// int bump * kappa and int bump * |kappa| over the bump support.
inline std::array<double, 2> bump_kappa(const PeriodicCurve& c, const Bump& b) {
    const Arc a = b.support();
    const double piece = std::max(c.spacing(), a.length() / 256.0);
    const double k = composite_gauss([&](double s) { return b.value(s) * c.curvature_at(s); }, a.begin, a.end, piece);
    const double ka = composite_gauss([&](double s) { return b.value(s) * std::abs(c.curvature_at(s)); }, a.begin, a.end, piece);
    return {k, ka};
}

// Integral of the unit-peak bump over its support: half_width * int_{-1}^{1} exp(1 - 1/(1-x^2)).
inline double unit_bump_area(double half_width) {
    const Bump b{true, 0.0, 1.0, 1.0, 4.0};
    return half_width * composite_gauss([&](double x) { return b.value(x); }, -1.0, 1.0, 1.0 / 128.0);
}

inline Bump make_bump(const PeriodicCurve& c, const std::vector<Arc>& arcs, double delta, const char* name) {
    Bump best;
    if (arcs.empty()) return best;
    const Arc* longest = &arcs[0];
    for (const Arc& a : arcs)
        if (a.length() > longest->length()) longest = &a;
    // A full-period arc still needs a point where the bump vanishes.
    const bool full = longest->length() >= c.length();
    const double lo = full ? longest->begin : longest->begin + delta;
    const double hi = full ? longest->end - 2.0 * delta : longest->end - delta;
    if (!(longest->length() > 4.0 * delta))
        throw DomainError(std::string("no admissible support interval for the ") + name + " bump");

    // Try the whole interval, then halves and quarters, keeping the best ratio.
    double best_ratio = 0.0;
    for (int level = 0; level < 3; ++level) {
        const int parts = 1 << level;
        const double w = (hi - lo) / parts;
        for (int k = 0; k < parts; ++k) {
            Bump b{true, lo + (k + 0.5) * w, 0.5 * w, 1.0, c.length()};
            b.amplitude = 1.0 / unit_bump_area(b.half_width);
            const auto [ik, ika] = bump_kappa(c, b);
            const double ratio = ika > 0.0 ? std::abs(ik) / ika : 0.0;
            if (ratio > best_ratio + 1e-12) {
                best_ratio = ratio;
                best = b;
            }
        }
        if (best_ratio > 0.5) break;
    }
    if (!(best_ratio > 1e-3))
        throw DomainError(std::string("curvature integral of the ") + name + " bump vanishes");
    // Scale so |int rho kappa| >= 0.1 * support length * mean |kappa| on the support.
    const auto [ik, ika] = bump_kappa(c, best);
    const double len = 2.0 * best.half_width;
    const double mean_abs_k = ika / (best.amplitude * unit_bump_area(best.half_width));
    const double threshold = 0.1 * len * mean_abs_k;
    if (std::abs(ik) < threshold) best.amplitude *= threshold / std::abs(ik);
    return best;
}

}  // namespace detail

/// Unit-area mollifier bumps on the longest arc of each phase, shrunk by delta.
inline PerturbationFields build_bumps(const PhaseCurve& pc, double delta) {
    if (!(delta > 0.0)) throw DomainError("bump margin delta must be positive");
    PerturbationFields f;
    f.delta = delta;
    f.phase0 = detail::make_bump(pc.curve(), pc.arcs(0), delta, "phase-0");
    f.phase1 = detail::make_bump(pc.curve(), pc.arcs(1), delta, "phase-1");
    return f;
}

/// Default admissible radii for r and t: the bump displacement stays below the
/// radius L / (2 pi) of the circle with the same length. Folding (1 + w kappa <= 0)
/// is checked separately wherever the perturbed curve is evaluated.
inline std::array<double, 2> default_perturbation_radius(const PhaseCurve& pc, const PerturbationFields& f) {
    const double D = pc.curve().length() / (2.0 * std::numbers::pi);
    const double inf = std::numeric_limits<double>::infinity();
    return {f.phase0.active ? D / f.phase0.peak() : inf, f.phase1.active ? D / f.phase1.peak() : inf};
}

namespace detail {

inline std::array<double, 2> radii(const PhaseCurve& pc, const PerturbationFields& f, double radius) {
    if (radius > 0.0) return {radius, radius};
    return default_perturbation_radius(pc, f);
}

}  // namespace detail

// --- mass deficit ---------------------------------------------------------------

namespace detail {

inline double profile_mass(double sdist, const ModelParams& p) {
    if (p.eps == 0.0 || std::isinf(sdist)) {
        if (p.eps == 0.0) return 1.0;
        return sdist > 0.0 ? 1.0 : 1.0 - p.c * std::sqrt(p.eps);
    }
    return optimal_profile(sdist, p).q;
}

inline std::vector<double> breakpoints(const PhaseCurve& pc, const PerturbationFields& f) {
    const double L = pc.curve().length();
    std::vector<double> bp{0.0, L};
    const auto& J = pc.jumps();
    for (std::size_t k = 0; k < J.size(); ++k) {
        bp.push_back(J[k]);
        const double next = k + 1 < J.size() ? J[k + 1] : J[0] + L;
        bp.push_back(std::fmod(0.5 * (J[k] + next), L));
    }
    for (const Bump* b : {&f.phase0, &f.phase1})
        if (b->active) {
            bp.push_back(std::fmod(std::fmod(b->center - b->half_width, L) + L, L));
            bp.push_back(std::fmod(std::fmod(b->center + b->half_width, L) + L, L));
        }
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    return bp;
}

}  // namespace detail

/// Speed of the perturbed curve gamma + w nu: sqrt((1 + w kappa)^2 + w'^2).
inline double perturbed_speed(double w, double dw, double kappa) {
    const double a = 1.0 + w * kappa;
    return std::sqrt(a * a + dw * dw);
}

/// Per-phase masses of the perturbed curve carrying M = q_eps4(sdist) minus targets.
/// eps4 = 0 uses M = 1.
inline MassPair mass_deficit(const PhaseCurve& pc, const PerturbationFields& f, double eps4, double c,
                             double r, double t, const MassPair& targets) {
    ModelParams p;
    p.c = c;
    p.eps = eps4;
    if (eps4 > 0.0) p.validate();
    const PeriodicCurve& curve = pc.curve();
    const double L = curve.length();
    const std::vector<double> bp = detail::breakpoints(pc, f);
    const double piece = eps4 > 0.0 ? std::min(eps4, L / 64.0) : L / 64.0;
    MassPair m;
    bool immersed = true;
    for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
        const double a = bp[k], b = bp[k + 1];
        const Phase ph = pc.phase_at(0.5 * (a + b));
        const double v = detail::composite_gauss(
            [&](double s) {
                const double w = f.displacement(r, t, s);
                const double dw = f.displacement_slope(r, t, s);
                const double kap = curve.curvature_at(s);
                if (1.0 + w * kap <= 0.0) immersed = false;
                return detail::profile_mass(pc.signed_distance(s), p) * perturbed_speed(w, dw, kap);
            },
            a, b, piece);
        (ph ? m.m2 : m.m1) += v;
    }
    if (!immersed) throw ImmersionError("perturbed curve folds over (1 + w kappa <= 0)");
    return {m.m1 - targets.m1, m.m2 - targets.m2};
}

/// [[int (1-chi) rho0 kappa, int (1-chi) rho1 kappa], [int chi rho0 kappa, int chi rho1 kappa]].
inline std::array<std::array<double, 2>, 2> jacobian_at_zero(const PhaseCurve& pc, const PerturbationFields& f,
                                                            double det_tol = 1e-12) {
    const PeriodicCurve& curve = pc.curve();
    const std::vector<double> bp = detail::breakpoints(pc, f);
    std::array<std::array<double, 2>, 2> A{};
    for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
        const double a = bp[k], b = bp[k + 1];
        const Phase ph = pc.phase_at(0.5 * (a + b));
        const double piece = std::max(curve.spacing(), (b - a) / 64.0);
        for (int j = 0; j < 2; ++j) {
            const Bump& bump = j == 0 ? f.phase0 : f.phase1;
            if (!bump.active) continue;
            A[ph][j] += detail::composite_gauss(
                [&](double s) { return bump.value(s) * curve.curvature_at(s); }, a, b, piece);
        }
    }
    // Only the equations and unknowns of present phases take part.
    const bool has0 = f.phase0.active, has1 = f.phase1.active;
    double det = 0.0;
    if (has0 && has1) det = A[0][0] * A[1][1] - A[0][1] * A[1][0];
    else if (has0) det = A[0][0];
    else if (has1) det = A[1][1];
    if (!(std::abs(det) > det_tol)) throw DomainError("mass Jacobian is singular");
    return A;
}

struct MassSolveOptions {
    double tol = 1e-10;
    int max_iters = 60;
    /// Admissible |r| and |t|; 0 selects default_perturbation_radius.
    double radius = 0.0;
    double r0 = 0.0, t0 = 0.0;
};

struct MassSolveResult {
    double r = 0.0, t = 0.0;
    MassPair residual;
    int iterations = 0;
    bool converged = false;
};

namespace detail {

// Damped Newton with forward-difference Jacobian on the active unknowns.
template <class Residual>
MassSolveResult damped_newton(Residual&& F, bool has0, bool has1, double r0, double t0, double tol,
                              int max_iters, std::array<double, 2> radius, double fd_step) {
    MassSolveResult out;
    double x[2] = {has0 ? r0 : 0.0, has1 ? t0 : 0.0};
    auto norm_inf = [&](const MassPair& m) {
        return std::max(has0 ? std::abs(m.m1) : 0.0, has1 ? std::abs(m.m2) : 0.0);
    };
    MassPair Fx = F(x[0], x[1]);
    for (int it = 0; it < max_iters; ++it) {
        out.iterations = it;
        if (!std::isfinite(Fx.m1) || !std::isfinite(Fx.m2)) throw DivergenceError("non-finite mass residual");
        if (norm_inf(Fx) <= tol) {
            out.converged = true;
            break;
        }
        double J[2][2] = {{1.0, 0.0}, {0.0, 1.0}};
        for (int j = 0; j < 2; ++j) {
            if ((j == 0 && !has0) || (j == 1 && !has1)) continue;
            const double hstep = fd_step * std::max(1.0, std::abs(x[j]));
            double y[2] = {x[0], x[1]};
            y[j] += hstep;
            const MassPair Fy = F(y[0], y[1]);
            J[0][j] = (Fy.m1 - Fx.m1) / hstep;
            J[1][j] = (Fy.m2 - Fx.m2) / hstep;
        }
        double dx[2] = {0.0, 0.0};
        if (has0 && has1) {
            const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
            if (det == 0.0) throw DivergenceError("singular Jacobian in mass solve");
            dx[0] = -(J[1][1] * Fx.m1 - J[0][1] * Fx.m2) / det;
            dx[1] = -(-J[1][0] * Fx.m1 + J[0][0] * Fx.m2) / det;
        } else if (has0) {
            dx[0] = -Fx.m1 / J[0][0];
        } else {
            dx[1] = -Fx.m2 / J[1][1];
        }
        double step = 1.0;
        bool accepted = false;
        const double f0 = norm_inf(Fx);
        for (int bt = 0; bt < 40; ++bt) {
            const double xr = x[0] + step * dx[0], xt = x[1] + step * dx[1];
            if (std::abs(xr) < radius[0] && std::abs(xt) < radius[1]) {
                try {
                    const MassPair Ft = F(xr, xt);
                    if (norm_inf(Ft) < f0) {
                        x[0] = xr;
                        x[1] = xt;
                        Fx = Ft;
                        accepted = true;
                        break;
                    }
                } catch (const ImmersionError&) {
                }
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (std::abs(x[0] + dx[0]) >= radius[0] || std::abs(x[1] + dx[1]) >= radius[1])
                throw DivergenceError("Newton step leaves the admissible perturbation radius (" +
                                      std::to_string(radius[0]) + ", " + std::to_string(radius[1]) + ")");
            // No decrease possible: residual already at rounding level.
            out.iterations = it + 1;
            break;
        }
        out.iterations = it + 1;
    }
    if (norm_inf(Fx) <= tol) out.converged = true;
    out.r = x[0];
    out.t = x[1];
    out.residual = Fx;
    return out;
}

}  // namespace detail

/// Solves mass_deficit(eps, r, t) = 0 by damped Newton.
inline MassSolveResult solve_mass_constraint(const PhaseCurve& pc, const PerturbationFields& f,
                                             const ModelParams& p, const MassPair& targets,
                                             const MassSolveOptions& o = {}) {
    jacobian_at_zero(pc, f);
    auto F = [&](double r, double t) { return mass_deficit(pc, f, p.eps, p.c, r, t, targets); };
    return detail::damped_newton(F, f.phase0.active, f.phase1.active, o.r0, o.t0, o.tol, o.max_iters,
                                 detail::radii(pc, f, o.radius), 1e-7);
}

// --- discrete recovery configuration -----------------------------------------------

struct RecoveryOptions {
    double delta = 0.1;          ///< bump margin around jumps
    double radius = 0.0;         ///< admissible |r|, |t|; 0 = default_perturbation_radius
    double cells_per_eps = 32.0; ///< output nodes per eps of arclength
    std::size_t min_nodes = 2048;
    /// Node counts tried above the minimum to balance the per-phase node sums.
    std::size_t node_window = 256;
    double tol = 1e-10;
    int max_iters = 60;
    bool check_embedding = true;
    EmbeddingOptions embedding;
    /// Tail integrals skip |sdist| < tail_delta; 0 uses delta.
    double tail_delta = 0.0;
};

struct RecoveryBuild {
    Configuration config;
    double r = 0.0, t = 0.0;
    MassPair residual;
    /// Per-phase factors applied to the sampled profile so the node sums hit the targets.
    double mass_scale0 = 1.0, mass_scale1 = 1.0;
    bool converged = false;
    /// Signed arc distance to the jump set at the preimage of each output node.
    std::vector<double> sdist;
};

namespace detail {

// Perturbed curve gamma + w nu resampled at n nodes of uniform arclength, with the
// parameter s of the unperturbed curve at each node.
struct PerturbedSamples {
    std::vector<Vec2> points;
    std::vector<double> preimage;
    double length = 0.0;
};

inline PerturbedSamples sample_perturbed(const PhaseCurve& pc, const PerturbationFields& f, double r, double t,
                                         std::size_t n) {
    const PeriodicCurve& c = pc.curve();
    const double h = c.length() / static_cast<double>(n);
    std::vector<double> speed(n), psi(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double s = h * static_cast<double>(k);
        const double w = f.displacement(r, t, s);
        const double kap = c.curvature_at(s);
        if (1.0 + w * kap <= 0.0) throw ImmersionError("perturbed curve folds over at s = " + std::to_string(s));
        speed[k] = perturbed_speed(w, f.displacement_slope(r, t, s), kap);
    }
    // cumulative arclength, fourth order
    for (std::size_t k = 0; k < n; ++k) {
        const auto i = static_cast<std::ptrdiff_t>(k);
        psi[k + 1] = psi[k] + h * (-speed[wrap(i - 1, n)] + 13.0 * speed[k] + 13.0 * speed[wrap(i + 1, n)] -
                                   speed[wrap(i + 2, n)]) / 24.0;
    }
    PerturbedSamples out;
    out.length = psi[n];
    const double Lp = out.length;
    const auto N = static_cast<std::ptrdiff_t>(n);
    auto psi_at = [&](std::ptrdiff_t k) {
        const std::ptrdiff_t q = (k % N + N) % N;
        return psi[static_cast<std::size_t>(q)] + Lp * static_cast<double>((k - q) / N);
    };
    out.points.resize(n);
    out.preimage.resize(n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double sigma = Lp * static_cast<double>(i) / static_cast<double>(n);
        while (k + 1 < n && psi[k + 1] <= sigma) ++k;
        const auto kk = static_cast<std::ptrdiff_t>(k);
        const double f0 = psi_at(kk - 1), f1 = psi_at(kk), f2 = psi_at(kk + 1), f3 = psi_at(kk + 2);
        // invert the cubic through nodes k-1..k+2 on [k, k+1]
        double x = (sigma - f1) / (f2 - f1);
        for (int it = 0; it < 30; ++it) {
            const double v = -x * (x - 1.0) * (x - 2.0) / 6.0 * f0 + (x + 1.0) * (x - 1.0) * (x - 2.0) / 2.0 * f1 -
                             (x + 1.0) * x * (x - 2.0) / 2.0 * f2 + (x + 1.0) * x * (x - 1.0) / 6.0 * f3;
            const double d = -(3.0 * x * x - 6.0 * x + 2.0) / 6.0 * f0 + (3.0 * x * x - 4.0 * x - 1.0) / 2.0 * f1 -
                             (3.0 * x * x - 2.0 * x - 2.0) / 2.0 * f2 + (3.0 * x * x - 1.0) / 6.0 * f3;
            const double dx = (v - sigma) / d;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double s = h * (static_cast<double>(k) + x);
        out.preimage[i] = s;
        out.points[i] = c.point_at(s) + f.displacement(r, t, s) * c.normal_at(s);
    }
    return out;
}

}  // namespace detail

inline std::size_t recovery_nodes(const PhaseCurve& pc, double eps, const RecoveryOptions& o) {
    const double want = std::ceil(pc.curve().length() * o.cells_per_eps / eps);
    return std::max(o.min_nodes, static_cast<std::size_t>(want));
}

namespace detail {

// Among n0 .. n0 + window - 1, the node count whose per-phase node sums best match
// the arc lengths of the perturbed curve (the jump images are known from n0).
inline std::size_t balanced_node_count(const PhaseCurve& pc, const PerturbationFields& f, double r, double t,
                                       std::size_t n0, std::size_t window) {
    const auto& J = pc.jumps();
    if (J.empty()) return n0;
    const PeriodicCurve& c = pc.curve();
    const double h = c.length() / static_cast<double>(n0);
    // arclength of the perturbed curve up to each jump (trapezoid on a fine grid suffices)
    std::vector<double> images;
    double acc = 0.0, prev = 0.0, sprev = 0.0;
    std::size_t next = 0;
    double Lp = 0.0;
    for (std::size_t k = 0; k <= n0; ++k) {
        const double s = h * static_cast<double>(k);
        const double sp = perturbed_speed(f.displacement(r, t, s), f.displacement_slope(r, t, s), c.curvature_at(s));
        if (k > 0) {
            while (next < J.size() && J[next] <= s) {
                images.push_back(acc + (J[next] - sprev) * prev);
                ++next;
            }
            acc += 0.5 * h * (prev + sp);
        }
        prev = sp;
        sprev = s;
    }
    Lp = acc;
    std::size_t best = n0;
    double best_err = std::numeric_limits<double>::infinity();
    for (std::size_t n = n0; n < n0 + window; ++n) {
        const double hp = Lp / static_cast<double>(n);
        double err = 0.0;
        for (std::size_t a = 0; a < images.size(); ++a) {
            const double b0 = images[a];
            const double b1 = a + 1 < images.size() ? images[a + 1] : images[0] + Lp;
            const double count = std::ceil(b1 / hp) - std::ceil(b0 / hp);
            err = std::max(err, std::abs(count * hp - (b1 - b0)));
        }
        if (err < best_err) {
            best_err = err;
            best = n;
        }
    }
    return best;
}

}  // namespace detail

/// Configuration for a solved (r, t): the perturbed curve at uniform arclength, chi and
/// M = q_eps(sdist) carried over from the preimage of each node, theta = nu. Each
/// phase's sampled mass is then scaled by target / (node sum), a factor 1 + O(h/length).
inline RecoveryBuild build_recovery(const PhaseCurve& pc, const PerturbationFields& f, const ModelParams& p,
                                    const MassPair& targets, double r, double t, const RecoveryOptions& o = {}) {
    p.validate();
    const std::size_t n = detail::balanced_node_count(pc, f, r, t, recovery_nodes(pc, p.eps, o), o.node_window);
    const detail::PerturbedSamples smp = detail::sample_perturbed(pc, f, r, t, n);
    RecoveryBuild out;
    out.r = r;
    out.t = t;
    out.sdist.resize(n);
    std::vector<Phase> chi(n);
    std::vector<double> mass(n);
    double sum0 = 0.0, sum1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        chi[i] = pc.phase_at(smp.preimage[i]);
        out.sdist[i] = pc.signed_distance(smp.preimage[i]);
        mass[i] = detail::profile_mass(out.sdist[i], p);
        (chi[i] ? sum1 : sum0) += mass[i];
    }
    const double hp = smp.length / static_cast<double>(n);
    if (sum0 > 0.0) out.mass_scale0 = targets.m1 / (hp * sum0);
    if (sum1 > 0.0) out.mass_scale1 = targets.m2 / (hp * sum1);
    for (std::size_t i = 0; i < n; ++i) mass[i] *= chi[i] ? out.mass_scale1 : out.mass_scale0;
    out.config = Configuration::normal_rays(PeriodicCurve::from_samples(smp.points, smp.length), std::move(chi),
                                            std::move(mass));
    const MassPair m = phase_masses(out.config);
    out.residual = {m.m1 - targets.m1, m.m2 - targets.m2};
    out.converged = std::abs(out.residual.m1) <= o.tol && std::abs(out.residual.m2) <= o.tol;
    return out;
}

/// Phase lengths of the unperturbed curve: the masses of M = 1.
inline MassPair default_targets(const PhaseCurve& pc) { return {pc.phase_length(0), pc.phase_length(1)}; }

/// Well term eps^-2 (1 - a M)^2 integrated over nodes at distance >= delta from the
/// phase boundaries, using the profile's cancellation-free residual.
inline double off_jump_well(const RecoveryBuild& b, const ModelParams& p, double delta) {
    double s = 0.0;
    for (double d : b.sdist) {
        if (std::abs(d) < delta || std::isinf(d)) continue;
        const double w = optimal_profile(d, p).well_residual;
        s += w * w;
    }
    return s * b.config.curve().spacing() / (p.eps * p.eps);
}

struct RecoveryRecord {
    double eps = 0.0;
    double r = 0.0, t = 0.0;
    double res1 = 0.0, res2 = 0.0;
    double E_part = 0.0, G_part = 0.0, total = 0.0;
    double limit_quarter = 0.0, limit_half = 0.0;
    double gap = 0.0;
    // Not part of the CSV layout.
    bool converged = false;
    std::string message;
    std::size_t nodes = 0;
    double mass_scale0 = 1.0, mass_scale1 = 1.0;
    double tail = 0.0;
    std::optional<bool> embedded;
    double seconds = 0.0;
};

struct RecoveryReport {
    std::vector<RecoveryRecord> records;
    LimitEnergy limit;
    MassPair targets;
    double delta = 0.0;
    double tail_delta = 0.0;
    double origin_shift = 0.0;

    bool any_converged() const {
        return std::any_of(records.begin(), records.end(), [](const RecoveryRecord& r) { return r.converged; });
    }
};

/// For each eps: solve the mass constraint (continuing from the previous eps), build
/// the configuration and compare its rescaled energy with the limit energy.
inline RecoveryReport limsup_report(const PhaseCurve& pc, const std::vector<double>& eps_list,
                                    const ModelParams& base, const MassPair& targets,
                                    const RecoveryOptions& o = {}, bool deterministic = false) {
    for (std::size_t k = 1; k < eps_list.size(); ++k)
        if (!(eps_list[k] < eps_list[k - 1])) throw DomainError("eps list must be strictly decreasing");
    RecoveryReport rep;
    rep.limit = limit_energy_curve(pc, base);
    rep.targets = targets;
    rep.delta = o.delta;
    rep.tail_delta = o.tail_delta > 0.0 ? o.tail_delta : o.delta;
    rep.origin_shift = pc.origin_shift();
    const PerturbationFields f = build_bumps(pc, o.delta);
    double r = 0.0, t = 0.0;
    for (double eps : eps_list) {
        const auto t0 = std::chrono::steady_clock::now();
        RecoveryRecord rec;
        rec.eps = eps;
        rec.limit_quarter = rep.limit.quarter_total();
        rec.limit_half = rep.limit.half_total();
        try {
            const ModelParams p = base.with_eps(eps);
            p.validate();
            if (!(3.0 * eps < pc.min_jump_gap()))
                throw DomainError("3 eps must be below the minimal jump gap");
            MassSolveOptions so;
            so.tol = o.tol;
            so.max_iters = o.max_iters;
            so.radius = o.radius;
            so.r0 = r;
            so.t0 = t;
            const MassSolveResult sol = solve_mass_constraint(pc, f, p, targets, so);
            if (!sol.converged) throw DivergenceError("mass constraint did not converge");
            const RecoveryBuild b = build_recovery(pc, f, p, targets, sol.r, sol.t, o);
            rec.r = b.r;
            rec.t = b.t;
            rec.res1 = b.residual.m1;
            rec.res2 = b.residual.m2;
            rec.E_part = separation_energy(b.config, p);
            rec.G_part = bending_energy(b.config, p);
            rec.total = rec.E_part + rec.G_part;
            rec.gap = energy_gap(rec.total, rec.limit_quarter);
            rec.nodes = b.config.size();
            rec.tail = off_jump_well(b, p, rep.tail_delta);
            rec.converged = b.converged;
            rec.mass_scale0 = b.mass_scale0;
            rec.mass_scale1 = b.mass_scale1;
            if (!b.converged) rec.message = "discrete mass residual above tolerance";
            if (o.check_embedding) {
                const EmbeddingResult er = embedding_check(b.config, eps, o.embedding);
                rec.embedded = er.pass;
                if (!er.pass) rec.message = "embedding check failed: " + er.witness->reason;
            }
            r = b.r;
            t = b.t;
        } catch (const Error& e) {
            rec.converged = false;
            rec.message = e.what();
        }
        const auto t1 = std::chrono::steady_clock::now();
        rec.seconds = deterministic ? 0.0 : std::chrono::duration<double>(t1 - t0).count();
        rep.records.push_back(rec);
    }
    return rep;
}

}  // namespace mesomem
