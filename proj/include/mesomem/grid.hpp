#pragma once

// Phase-separation energy on uniform rectangular grids (d = 1, 2).
//
// Nodes are cell centers of [0, extent_x] (x [0, extent_y]). Gradients are
// differences across interior cell faces; boundary faces carry no flux, which
// is the natural boundary condition of the unconstrained energy.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "mesomem/error.hpp"
#include "mesomem/model.hpp"
#include "mesomem/parallel.hpp"

namespace mesomem {

struct Grid {
    int dim = 1;
    std::array<std::size_t, 2> n{4, 1};
    std::array<double, 2> extent{1.0, 1.0};

    static Grid line(std::size_t nx, double length = 1.0) {
        Grid g;
        g.dim = 1;
        g.n = {nx, 1};
        g.extent = {length, 1.0};
        g.validate();
        return g;
    }
    static Grid rect(std::size_t nx, std::size_t ny, double lx = 1.0, double ly = 1.0) {
        Grid g;
        g.dim = 2;
        g.n = {nx, ny};
        g.extent = {lx, ly};
        g.validate();
        return g;
    }

    void validate() const {
        if (dim != 1 && dim != 2) throw DomainError("grid dimension must be 1 or 2");
        for (int k = 0; k < dim; ++k) {
            if (n[k] < 4) throw DomainError("grid needs at least 4 nodes per axis");
            if (!(extent[k] > 0.0) || !std::isfinite(extent[k]))
                throw DomainError("grid extent must be positive");
        }
    }

    double h(int axis) const noexcept { return extent[axis] / static_cast<double>(n[axis]); }
    std::size_t size() const noexcept { return dim == 1 ? n[0] : n[0] * n[1]; }
    double cell_volume() const noexcept { return dim == 1 ? h(0) : h(0) * h(1); }
    double volume() const noexcept { return dim == 1 ? extent[0] : extent[0] * extent[1]; }
    /// Largest spacing over the active axes.
    double max_h() const noexcept { return dim == 1 ? h(0) : std::max(h(0), h(1)); }

    std::size_t index(std::size_t ix, std::size_t iy = 0) const noexcept { return iy * n[0] + ix; }
    double x(std::size_t ix) const noexcept { return (static_cast<double>(ix) + 0.5) * h(0); }
    double y(std::size_t iy) const noexcept { return (static_cast<double>(iy) + 0.5) * h(1); }

    friend bool operator==(const Grid& a, const Grid& b) {
        if (a.dim != b.dim) return false;
        for (int k = 0; k < a.dim; ++k)
            if (a.n[k] != b.n[k] || a.extent[k] != b.extent[k]) return false;
        return true;
    }
};

struct GridField {
    Grid grid;
    std::vector<double> values;

    GridField() = default;
    GridField(const Grid& g, double fill) : grid(g), values(g.size(), fill) {}
    GridField(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (values.size() != grid.size()) throw GridMismatch("field size does not match grid");
    }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
};

struct PhaseMap {
    Grid grid;
    std::vector<Phase> values;

    PhaseMap() = default;
    PhaseMap(const Grid& g, Phase fill) : grid(g), values(g.size(), fill) {}
    PhaseMap(const Grid& g, std::vector<Phase> v) : grid(g), values(std::move(v)) {
        if (values.size() != grid.size()) throw GridMismatch("phase map size does not match grid");
        for (Phase p : values)
            if (p > 1) throw DomainError("phase values must be 0 or 1");
    }
    Phase operator[](std::size_t i) const { return values[i]; }
};

namespace detail {

inline void require_same_grid(const Grid& a, const Grid& b) {
    if (!(a == b)) throw GridMismatch("fields live on different grids");
}

// Sum over nodes of vol * (well(i) + 1/2 sum_k forward_diff_k^2), with phase(i) a callable.
template <class PhaseOf>
double energy_sum(const GridField& M, PhaseOf&& phase_of, const ModelParams& p,
                  const ExecPolicy& policy) {
    const Grid& g = M.grid;
    const DerivedConstants d = derive_constants(p);
    const double vol = g.cell_volume();
    const double inv_eps2 = 1.0 / (p.eps * p.eps);
    const double hx = g.h(0);
    const double hy = g.dim == 2 ? g.h(1) : 1.0;
    const std::size_t nx = g.n[0];
    const std::size_t ny = g.dim == 2 ? g.n[1] : 1;
    const double* m = M.values.data();
    const double half_sigma = 0.5 * p.sigma;
    return block_sum(g.size(), policy, [&](std::size_t i) {
        const std::size_t ix = i % nx;
        const std::size_t iy = i / nx;
        const double r = 1.0 - d.a(phase_of(i)) * m[i];
        double grad2 = 0.0;
        if (ix + 1 < nx) {
            const double dx = (m[i + 1] - m[i]) / hx;
            grad2 += dx * dx;
        }
        if (iy + 1 < ny) {
            const double dy = (m[i + nx] - m[i]) / hy;
            grad2 += dy * dy;
        }
        return vol * (r * r * inv_eps2 + half_sigma * grad2);
    });
}

}  // namespace detail

/// Discrete E_eps(M, chi): well term by midpoint quadrature plus (sigma/2)|grad M|^2
/// over interior faces.
inline double grid_energy(const GridField& M, const PhaseMap& chi, const ModelParams& p,
                          const ExecPolicy& policy = default_policy()) {
    detail::require_same_grid(M.grid, chi.grid);
    const Phase* c = chi.values.data();
    return detail::energy_sum(M, [c](std::size_t i) { return c[i]; }, p, policy);
}

/// Gradient of grid_energy with respect to the nodal values of M.
inline GridField grid_energy_gradient(const GridField& M, const PhaseMap& chi,
                                      const ModelParams& p,
                                      const ExecPolicy& policy = default_policy()) {
    detail::require_same_grid(M.grid, chi.grid);
    const Grid& g = M.grid;
    const DerivedConstants d = derive_constants(p);
    GridField out(g, 0.0);
    const double vol = g.cell_volume();
    const double inv_eps2 = 1.0 / (p.eps * p.eps);
    const double ihx2 = 1.0 / (g.h(0) * g.h(0));
    const double ihy2 = g.dim == 2 ? 1.0 / (g.h(1) * g.h(1)) : 0.0;
    const std::size_t nx = g.n[0];
    const std::size_t ny = g.dim == 2 ? g.n[1] : 1;
    const double* m = M.values.data();
    double* o = out.values.data();
    parallel_blocks(g.size(), policy, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t ix = i % nx;
            const std::size_t iy = i / nx;
            const double a = d.a(chi.values[i]);
            double lap = 0.0;  // sum over neighbours of (m_i - m_j)/h^2
            if (ix > 0) lap += (m[i] - m[i - 1]) * ihx2;
            if (ix + 1 < nx) lap += (m[i] - m[i + 1]) * ihx2;
            if (iy > 0) lap += (m[i] - m[i - nx]) * ihy2;
            if (iy + 1 < ny) lap += (m[i] - m[i + nx]) * ihy2;
            o[i] = vol * (-2.0 * a * (1.0 - a * m[i]) * inv_eps2 + p.sigma * lap);
        }
    });
    return out;
}

/// Thresholded phase map chi_{M > a_star}.
inline PhaseMap threshold_phase_map(const GridField& M, const ModelParams& p) {
    const DerivedConstants d = derive_constants(p);
    PhaseMap chi(M.grid, Phase{0});
    for (std::size_t i = 0; i < M.values.size(); ++i) chi.values[i] = threshold_phase(M[i], d);
    return chi;
}

/// grid_energy(M, threshold(M)): the minimum of grid_energy over chi for fixed M.
inline double reduced_energy(const GridField& M, const ModelParams& p,
                             const ExecPolicy& policy = default_policy()) {
    const DerivedConstants d = derive_constants(p);
    const double* m = M.values.data();
    return detail::energy_sum(M, [&](std::size_t i) { return threshold_phase(m[i], d); }, p,
                              policy);
}

/// Face-counting total variation of chi: interior faces between different phases,
/// weighted by face measure (1 in 1D, the transverse spacing in 2D).
inline double discrete_perimeter(const PhaseMap& chi) {
    const Grid& g = chi.grid;
    const std::size_t nx = g.n[0];
    const std::size_t ny = g.dim == 2 ? g.n[1] : 1;
    const double wx = g.dim == 2 ? g.h(1) : 1.0;  // measure of a face normal to x
    const double wy = g.h(0);
    std::size_t cx = 0, cy = 0;
    for (std::size_t iy = 0; iy < ny; ++iy)
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const std::size_t i = g.index(ix, iy);
            if (ix + 1 < nx && chi.values[i] != chi.values[i + 1]) ++cx;
            if (iy + 1 < ny && chi.values[i] != chi.values[i + nx]) ++cy;
        }
    return static_cast<double>(cx) * wx + static_cast<double>(cy) * wy;
}

/// A real value or +infinity, kept as an explicit tag.
struct ExtendedReal {
    bool infinite = false;
    double value = 0.0;

    static ExtendedReal inf() { return {true, 0.0}; }
    static ExtendedReal finite(double v) { return {false, v}; }
    std::string str() const;
};

inline std::string ExtendedReal::str() const {
    if (infinite) return "+inf";
    return std::to_string(value);
}

/// Macroscale energy (c^2/sqrt 8) Per(chi) if M == 1 (within tol_M in max norm), else +inf.
inline ExtendedReal limit_energy(const GridField& M, const PhaseMap& chi, const ModelParams& p,
                                 double tol_M = 1e-12) {
    detail::require_same_grid(M.grid, chi.grid);
    for (double v : M.values)
        if (!(std::abs(v - 1.0) <= tol_M)) return ExtendedReal::inf();
    return ExtendedReal::finite(line_tension(p.c) * discrete_perimeter(chi));
}

/// Discrete total variation of H(M) using the forward-face stencil of grid_energy:
/// sum_i vol |D^+ H(M)|_i with zero difference across the boundary.
inline double tv_of_H(const GridField& M, const ModelParams& p,
                      const ExecPolicy& policy = default_policy()) {
    const Grid& g = M.grid;
    std::vector<double> H(M.values.size());
    for (std::size_t i = 0; i < H.size(); ++i) H[i] = antiderivative_H(M[i], p);
    const double vol = g.cell_volume();
    const double hx = g.h(0);
    const double hy = g.dim == 2 ? g.h(1) : 1.0;
    const std::size_t nx = g.n[0];
    const std::size_t ny = g.dim == 2 ? g.n[1] : 1;
    return block_sum(g.size(), policy, [&](std::size_t i) {
        const std::size_t ix = i % nx;
        const std::size_t iy = i / nx;
        const double dx = ix + 1 < nx ? (H[i + 1] - H[i]) / hx : 0.0;
        const double dy = iy + 1 < ny ? (H[i + nx] - H[i]) / hy : 0.0;
        return vol * std::sqrt(dx * dx + dy * dy);
    });
}

// --- phase-set construction ---------------------------------------------------

/// Phase set used to build fields: the half domain x > extent_x/2, a centered
/// disk (interval in 1D), or an arbitrary phase map on a fixed grid.
struct PhaseShape {
    enum class Kind { half, disk, map };
    Kind kind = Kind::half;
    double radius = 0.25;
    PhaseMap map;

    static PhaseShape half() { return {Kind::half, 0.0, {}}; }
    static PhaseShape disk(double r) { return {Kind::disk, r, {}}; }
    static PhaseShape from_map(PhaseMap m) { return {Kind::map, 0.0, std::move(m)}; }
};

/// Signed distance to the interface, positive inside phase 1.
/// Analytic for half/disk; brute force over interface faces for maps.
inline GridField signed_distance(const Grid& g, const PhaseShape& shape) {
    GridField out(g, 0.0);
    const std::size_t nx = g.n[0];
    const std::size_t ny = g.dim == 2 ? g.n[1] : 1;
    const double cx = 0.5 * g.extent[0];
    const double cy = 0.5 * g.extent[1];
    if (shape.kind == PhaseShape::Kind::half) {
        for (std::size_t iy = 0; iy < ny; ++iy)
            for (std::size_t ix = 0; ix < nx; ++ix) out[g.index(ix, iy)] = g.x(ix) - cx;
        return out;
    }
    if (shape.kind == PhaseShape::Kind::disk) {
        for (std::size_t iy = 0; iy < ny; ++iy)
            for (std::size_t ix = 0; ix < nx; ++ix) {
                const double dx = g.x(ix) - cx;
                const double dy = g.dim == 2 ? g.y(iy) - cy : 0.0;
                out[g.index(ix, iy)] = shape.radius - std::hypot(dx, dy);
            }
        return out;
    }
    const PhaseMap& chi = shape.map;
    detail::require_same_grid(g, chi.grid);
    // Interface faces as segments (points in 1D).
    struct Seg {
        double x0, y0, x1, y1;
    };
    std::vector<Seg> faces;
    const double hx = g.h(0);
    const double hy = g.dim == 2 ? g.h(1) : 0.0;
    for (std::size_t iy = 0; iy < ny; ++iy)
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const std::size_t i = g.index(ix, iy);
            if (ix + 1 < nx && chi[i] != chi[i + 1]) {
                const double fx = (static_cast<double>(ix) + 1.0) * hx;
                const double yc = g.dim == 2 ? g.y(iy) : 0.0;
                faces.push_back({fx, yc - 0.5 * hy, fx, yc + 0.5 * hy});
            }
            if (g.dim == 2 && iy + 1 < ny && chi[i] != chi[i + nx]) {
                const double fy = (static_cast<double>(iy) + 1.0) * hy;
                faces.push_back({g.x(ix) - 0.5 * hx, fy, g.x(ix) + 0.5 * hx, fy});
            }
        }
    const double far = 2.0 * std::hypot(g.extent[0], g.dim == 2 ? g.extent[1] : 0.0);
    for (std::size_t iy = 0; iy < ny; ++iy)
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const double px = g.x(ix);
            const double py = g.dim == 2 ? g.y(iy) : 0.0;
            double best = far;
            for (const Seg& s : faces) {
                const double vx = s.x1 - s.x0, vy = s.y1 - s.y0;
                const double len2 = vx * vx + vy * vy;
                double t = len2 > 0.0 ? ((px - s.x0) * vx + (py - s.y0) * vy) / len2 : 0.0;
                t = std::clamp(t, 0.0, 1.0);
                best = std::min(best, std::hypot(px - s.x0 - t * vx, py - s.y0 - t * vy));
            }
            const std::size_t i = g.index(ix, iy);
            out[i] = chi[i] ? best : -best;
        }
    return out;
}

/// Phase map of a shape on grid g (nodes with positive signed distance are phase 1).
inline PhaseMap rasterize(const Grid& g, const PhaseShape& shape) {
    if (shape.kind == PhaseShape::Kind::map) {
        detail::require_same_grid(g, shape.map.grid);
        return shape.map;
    }
    const GridField sd = signed_distance(g, shape);
    PhaseMap chi(g, Phase{0});
    for (std::size_t i = 0; i < g.size(); ++i) chi.values[i] = sd[i] > 0.0 ? 1 : 0;
    return chi;
}

/// M = q_eps(sdist): the profile composed with the signed distance.
inline GridField profile_field(const GridField& sdist, const ModelParams& p) {
    GridField out(sdist.grid, 0.0);
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out[i] = optimal_profile(sdist[i], p).q;
    return out;
}

}  // namespace mesomem
