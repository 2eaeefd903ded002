#pragma once

// Gradient minimization of the grid energy and eps-continuation sweeps.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mesomem/grid.hpp"

namespace mesomem {

enum class StepRule { fixed, adaptive_two_point };

struct MinimizeOptions {
    int max_iters = 50000;
    /// Stop when the L2 norm of the functional derivative drops below this.
    double grad_tol = 1e-6;
    StepRule step_rule = StepRule::adaptive_two_point;
    std::uint64_t seed = 0;

    void validate() const {
        if (max_iters < 1) throw DomainError("max_iters must be >= 1");
        if (!(grad_tol > 0.0)) throw DomainError("grad_tol must be positive");
    }
};

struct MinimizeResult {
    GridField M;
    double energy = 0.0;
    int iterations = 0;
    bool converged = false;  ///< false: iteration cap reached
    /// Stopped because energy decrease fell below rounding level.
    bool stagnated = false;
    double grad_norm = 0.0;
    std::vector<std::string> warnings;
};

namespace detail {

inline double l2_functional_norm(const GridField& g) {
    double s = 0.0;
    for (double v : g.values) s += v * v;
    return std::sqrt(s / g.grid.cell_volume());
}

// Upper bound of the Hessian spectrum (Gershgorin).
inline double hessian_bound(const Grid& g, const ModelParams& p, const DerivedConstants& d) {
    double lap = 0.0;
    for (int k = 0; k < g.dim; ++k) lap += 4.0 / (g.h(k) * g.h(k));
    const double amax = std::max(d.a0, d.a1);
    return g.cell_volume() * (2.0 * amax * amax / (p.eps * p.eps) + p.sigma * lap);
}

inline void check_resolution(const Grid& g, const ModelParams& p, std::vector<std::string>& w) {
    if (g.max_h() > p.eps / 4.0)
        w.push_back("grid spacing " + std::to_string(g.max_h()) + " exceeds eps/4 = " +
                    std::to_string(p.eps / 4.0));
}

}  // namespace detail

/// Gradient descent on M for fixed chi, starting from `initial`. The adaptive rule takes
/// Barzilai-Borwein steps and halves them until the Armijo condition holds, so every
/// accepted step decreases the energy.
inline MinimizeResult minimize_fixed_phase(const PhaseMap& chi, const GridField& initial,
                                           const ModelParams& p, const MinimizeOptions& opts = {},
                                           const ExecPolicy& policy = default_policy()) {
    opts.validate();
    detail::require_same_grid(chi.grid, initial.grid);
    const DerivedConstants d = derive_constants(p);
    MinimizeResult res;
    detail::check_resolution(chi.grid, p, res.warnings);

    GridField x = initial;
    double E = grid_energy(x, chi, p, policy);
    if (!std::isfinite(E)) throw DivergenceError("initial energy is not finite");
    GridField g = grid_energy_gradient(x, chi, p, policy);
    const double base_step = 1.0 / detail::hessian_bound(chi.grid, p, d);
    double step = base_step;
    GridField trial = x;

    int it = 0;
    int flat_steps = 0;
    for (; it < opts.max_iters; ++it) {
        res.grad_norm = detail::l2_functional_norm(g);
        if (res.grad_norm <= opts.grad_tol) {
            res.converged = true;
            break;
        }
        double g2 = 0.0;
        for (double v : g.values) g2 += v * v;

        double Et = 0.0;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t i = 0; i < x.values.size(); ++i) trial[i] = x[i] - step * g[i];
            Et = grid_energy(trial, chi, p, policy);
            if (!std::isfinite(Et))
                throw DivergenceError("non-finite energy at iteration " + std::to_string(it));
            if (Et <= E - 1e-4 * step * g2) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            res.converged = true;
            res.stagnated = true;
            break;
        }
        // Decrease at rounding level for several steps in a row: stationary to machine precision.
        flat_steps = (E - Et) <= 1e-14 * std::abs(E) ? flat_steps + 1 : 0;
        if (flat_steps >= 5) {
            res.converged = true;
            res.stagnated = true;
            break;
        }
        GridField gt = grid_energy_gradient(trial, chi, p, policy);
        if (opts.step_rule == StepRule::adaptive_two_point) {
            double ss = 0.0, sy = 0.0;
            for (std::size_t i = 0; i < x.values.size(); ++i) {
                const double s = trial[i] - x[i];
                const double y = gt[i] - g[i];
                ss += s * s;
                sy += s * y;
            }
            step = sy > 0.0 ? ss / sy : base_step;
        } else {
            step = base_step;
        }
        std::swap(x.values, trial.values);
        g = std::move(gt);
        E = Et;
    }
    res.iterations = it;
    res.M = std::move(x);
    res.energy = E;
    if (!res.converged) res.warnings.push_back("iteration cap reached before grad_tol");
    return res;
}

/// Per-phase well bottoms: 1 on phase 1, 1/lambda on phase 0.
inline GridField well_bottoms(const PhaseMap& chi, const ModelParams& p) {
    const DerivedConstants d = derive_constants(p);
    GridField M(chi.grid, 1.0);
    for (std::size_t i = 0; i < M.values.size(); ++i) M[i] = 1.0 / d.a(chi[i]);
    return M;
}

inline MinimizeResult minimize_fixed_phase(const PhaseMap& chi, const ModelParams& p,
                                           const MinimizeOptions& opts = {},
                                           const ExecPolicy& policy = default_policy()) {
    return minimize_fixed_phase(chi, well_bottoms(chi, p), p, opts, policy);
}

struct AlternatingResult {
    GridField M;
    PhaseMap chi;
    double energy = 0.0;
    int iterations = 0;  ///< total inner gradient iterations
    int rounds = 0;
    bool converged = false;
};

/// Alternates the exact chi update chi = threshold(M) with minimization over M,
/// until chi is a fixed point.
inline AlternatingResult minimize_alternating(const GridField& M0, const ModelParams& p,
                                              const MinimizeOptions& opts = {},
                                              const ExecPolicy& policy = default_policy(),
                                              int max_rounds = 100) {
    AlternatingResult out;
    out.M = M0;
    out.chi = threshold_phase_map(M0, p);
    for (int round = 0; round < max_rounds; ++round) {
        MinimizeResult r = minimize_fixed_phase(out.chi, out.M, p, opts, policy);
        out.iterations += r.iterations;
        out.M = std::move(r.M);
        out.rounds = round + 1;
        PhaseMap next = threshold_phase_map(out.M, p);
        if (next.values == out.chi.values) {
            out.converged = r.converged;
            break;
        }
        out.chi = std::move(next);
    }
    out.energy = grid_energy(out.M, out.chi, p, policy);
    return out;
}

struct SweepRecord {
    double eps = 0.0;
    double min_energy = 0.0;
    double profile_energy = 0.0;
    double limit_energy = 0.0;
    double gap = 0.0;
    int iters = 0;
    double seconds = 0.0;
    // Not serialized.
    std::size_t nodes_per_axis = 0;
    double perimeter = 0.0;
    bool converged = false;
};

struct SweepReport {
    std::vector<SweepRecord> records;
    std::vector<std::string> warnings;
};

struct SweepOptions {
    int dim = 1;
    double extent = 1.0;
    /// Nodes per unit eps: h <= eps / cells_per_eps on the refined grid.
    double cells_per_eps = 4.0;
    std::size_t min_nodes = 64;
    /// Record zero seconds so reports are byte-reproducible.
    bool deterministic = false;
};

inline Grid sweep_grid(const SweepOptions& so, double eps) {
    std::size_t n = static_cast<std::size_t>(std::ceil(so.extent * so.cells_per_eps / eps));
    n = std::max(n, so.min_nodes);
    n += n % 2;  // even: the half-space interface falls on a face
    return so.dim == 1 ? Grid::line(n, so.extent) : Grid::rect(n, n, so.extent, so.extent);
}

/// For each eps: build M = q_eps(sdist) for the phase set, minimize over M from it,
/// and compare with the sharp-interface value (c^2/sqrt 8) * face-counting perimeter.
inline SweepReport epsilon_sweep(const PhaseShape& shape, const std::vector<double>& eps_list,
                                 const ModelParams& base, const MinimizeOptions& opts = {},
                                 const SweepOptions& so = {},
                                 const ExecPolicy& policy = default_policy()) {
    for (std::size_t k = 1; k < eps_list.size(); ++k)
        if (!(eps_list[k] < eps_list[k - 1]))
            throw DomainError("eps list must be strictly decreasing");
    SweepReport report;
    for (double eps : eps_list) {
        const auto t0 = std::chrono::steady_clock::now();
        const ModelParams p = base.with_eps(eps);
        p.validate();
        const Grid g = shape.kind == PhaseShape::Kind::map ? shape.map.grid : sweep_grid(so, eps);
        const PhaseMap chi = rasterize(g, shape);
        const GridField M0 = profile_field(signed_distance(g, shape), p);
        MinimizeResult mr = minimize_fixed_phase(chi, M0, p, opts, policy);
        for (auto& w : mr.warnings) report.warnings.push_back("eps=" + std::to_string(eps) + ": " + w);

        SweepRecord rec;
        rec.eps = eps;
        rec.profile_energy = grid_energy(M0, chi, p, policy);
        rec.min_energy = mr.energy;
        rec.perimeter = discrete_perimeter(chi);
        rec.limit_energy = line_tension(p.c) * rec.perimeter;
        rec.gap = energy_gap(rec.min_energy, rec.limit_energy);
        rec.iters = mr.iterations;
        rec.nodes_per_axis = g.n[0];
        rec.converged = mr.converged;
        const auto t1 = std::chrono::steady_clock::now();
        rec.seconds = so.deterministic ? 0.0 : std::chrono::duration<double>(t1 - t0).count();
        report.records.push_back(rec);
    }
    return report;
}

}  // namespace mesomem
