#pragma once

// Ray map (s, m) -> gamma(s) + t(s, m) theta(s) and sampled injectivity tests on
// the quadrilateral mesh it induces.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mesomem/configuration.hpp"

namespace mesomem {

/// Position of mass coordinate m on the ray at arclength s.
inline Vec2 ray_map(const Configuration& Z, double s, double m, double eps) {
    const double h = Z.curve().spacing();
    const Vec2 g = Z.curve().point_at(s);
    Vec2 th = periodic_interpolate(std::span<const Vec2>(Z.theta()), h, s);
    th = th / norm(th);
    const double A = periodic_interpolate(std::span<const double>(Z.alignment()), h, s);
    const double B = periodic_interpolate(std::span<const double>(Z.rotation()), h, s);
    return g + ray_offset(A, B, m, eps) * th;
}

struct EmbeddingOptions {
    std::size_t s_samples = 512;
    std::size_t m_samples = 16;

    void validate() const {
        if (s_samples < 16 || m_samples < 16)
            throw DomainError("embedding check needs at least 16 samples per direction");
    }
};

struct EmbeddingWitness {
    std::size_t config_a = 0, config_b = 0;
    std::size_t s_index_a = 0, m_index_a = 0, s_index_b = 0, m_index_b = 0;
    double s_a = 0.0, s_b = 0.0;
    Vec2 point;
    std::string reason;
};

struct EmbeddingResult {
    bool pass = true;
    std::optional<EmbeddingWitness> witness;
};

using OverlapResult = EmbeddingResult;

namespace detail {

struct RayMesh {
    std::size_t ns = 0, nm = 0;
    std::vector<Vec2> pts;  // ns rows of nm + 1 points
    std::vector<double> s;

    Vec2 at(std::size_t i, std::size_t j) const { return pts[(i % ns) * (nm + 1) + j]; }
    std::array<Vec2, 4> quad(std::size_t i, std::size_t j) const {
        return {at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)};
    }
    std::size_t quads() const noexcept { return ns * nm; }
};

inline RayMesh build_ray_mesh(const Configuration& Z, double eps, const EmbeddingOptions& o) {
    RayMesh mesh;
    mesh.ns = o.s_samples;
    mesh.nm = o.m_samples;
    mesh.pts.resize(mesh.ns * (mesh.nm + 1));
    mesh.s.resize(mesh.ns);
    const double h = Z.curve().spacing();
    const double L = Z.curve().length();
    for (std::size_t i = 0; i < mesh.ns; ++i) {
        const double s = L * static_cast<double>(i) / static_cast<double>(mesh.ns);
        mesh.s[i] = s;
        const double M = std::max(0.0, periodic_interpolate(std::span<const double>(Z.mass()), h, s));
        for (std::size_t j = 0; j <= mesh.nm; ++j) {
            const double m = M * (2.0 * static_cast<double>(j) / static_cast<double>(mesh.nm) - 1.0);
            mesh.pts[i * (mesh.nm + 1) + j] = ray_map(Z, s, m, eps);
        }
    }
    return mesh;
}

inline int orientation(Vec2 a, Vec2 b, Vec2 c) {
    const double v = cross(b - a, c - a);
    return (v > 0.0) - (v < 0.0);
}

inline bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
}

/// Closed segments ab and cd share a point.
inline bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const int o1 = orientation(a, b, c), o2 = orientation(a, b, d);
    const int o3 = orientation(c, d, a), o4 = orientation(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

inline bool point_in_polygon(const std::array<Vec2, 4>& q, Vec2 p) {
    bool inside = false;
    for (std::size_t i = 0, j = 3; i < 4; j = i++) {
        if ((q[i].y > p.y) != (q[j].y > p.y)) {
            const double x = q[j].x + (p.y - q[j].y) * (q[i].x - q[j].x) / (q[i].y - q[j].y);
            if (p.x < x) inside = !inside;
        }
    }
    return inside;
}

inline bool quads_intersect(const std::array<Vec2, 4>& p, const std::array<Vec2, 4>& q) {
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            if (segments_intersect(p[i], p[(i + 1) % 4], q[j], q[(j + 1) % 4])) return true;
    return point_in_polygon(q, p[0]) || point_in_polygon(p, q[0]);
}

struct Box {
    double x0, y0, x1, y1;
};

inline Box bounds(const std::array<Vec2, 4>& q) {
    Box b{q[0].x, q[0].y, q[0].x, q[0].y};
    for (const Vec2& v : q) {
        b.x0 = std::min(b.x0, v.x);
        b.y0 = std::min(b.y0, v.y);
        b.x1 = std::max(b.x1, v.x);
        b.y1 = std::max(b.y1, v.y);
    }
    return b;
}

struct QuadRef {
    std::size_t mesh, i, j;
};

// Candidate pairs from a uniform hash grid over quad bounding boxes, in a
// deterministic order.
inline std::vector<std::pair<std::size_t, std::size_t>> candidate_pairs(const std::vector<Box>& boxes) {
    std::vector<double> sizes;
    sizes.reserve(boxes.size());
    for (const Box& b : boxes) sizes.push_back(std::max(b.x1 - b.x0, b.y1 - b.y0));
    std::vector<double> sorted = sizes;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
    double cell = sorted[sorted.size() / 2];
    if (!(cell > 0.0)) cell = 1e-12;
    for (double s : sizes) cell = std::max(cell, s / 64.0);

    std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
    auto key = [](std::int64_t cx, std::int64_t cy) {
        return (static_cast<std::uint64_t>(cx) << 32) ^ static_cast<std::uint64_t>(cy & 0xffffffff);
    };
    for (std::size_t k = 0; k < boxes.size(); ++k) {
        const Box& b = boxes[k];
        const auto cx0 = static_cast<std::int64_t>(std::floor(b.x0 / cell));
        const auto cx1 = static_cast<std::int64_t>(std::floor(b.x1 / cell));
        const auto cy0 = static_cast<std::int64_t>(std::floor(b.y0 / cell));
        const auto cy1 = static_cast<std::int64_t>(std::floor(b.y1 / cell));
        for (auto cx = cx0; cx <= cx1; ++cx)
            for (auto cy = cy0; cy <= cy1; ++cy) buckets[key(cx, cy)].push_back(k);
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (const auto& [_, items] : buckets)
        for (std::size_t a = 0; a < items.size(); ++a)
            for (std::size_t b = a + 1; b < items.size(); ++b) {
                const Box& p = boxes[items[a]];
                const Box& q = boxes[items[b]];
                if (p.x1 < q.x0 || q.x1 < p.x0 || p.y1 < q.y0 || q.y1 < p.y0) continue;
                pairs.emplace_back(std::min(items[a], items[b]), std::max(items[a], items[b]));
            }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    return pairs;
}

template <class Skip>
EmbeddingResult mesh_check(const std::vector<RayMesh>& meshes, Skip&& skip) {
    std::vector<QuadRef> refs;
    std::vector<Box> boxes;
    std::vector<std::array<Vec2, 4>> quads;
    for (std::size_t k = 0; k < meshes.size(); ++k)
        for (std::size_t i = 0; i < meshes[k].ns; ++i)
            for (std::size_t j = 0; j < meshes[k].nm; ++j) {
                refs.push_back({k, i, j});
                quads.push_back(meshes[k].quad(i, j));
                boxes.push_back(bounds(quads.back()));
            }
    for (const auto& [a, b] : candidate_pairs(boxes)) {
        if (skip(refs[a], refs[b])) continue;
        if (!quads_intersect(quads[a], quads[b])) continue;
        EmbeddingResult r;
        r.pass = false;
        EmbeddingWitness w;
        w.config_a = refs[a].mesh;
        w.config_b = refs[b].mesh;
        w.s_index_a = refs[a].i;
        w.m_index_a = refs[a].j;
        w.s_index_b = refs[b].i;
        w.m_index_b = refs[b].j;
        w.s_a = meshes[w.config_a].s[w.s_index_a];
        w.s_b = meshes[w.config_b].s[w.s_index_b];
        for (const Vec2& v : quads[a]) w.point += 0.25 * v;
        w.reason = "ray-map elements intersect";
        r.witness = w;
        return r;
    }
    return {};
}

inline EmbeddingResult overrun_failure(std::size_t config, const std::string& what) {
    EmbeddingResult r;
    r.pass = false;
    EmbeddingWitness w;
    w.config_a = w.config_b = config;
    w.reason = what;
    r.witness = w;
    return r;
}

}  // namespace detail

/// Samples the ray map on an (s, m) grid and tests every pair of quadrilaterals
/// whose rays are not neighbors. A sufficient sampled test, not a proof.
inline EmbeddingResult embedding_check(const Configuration& Z, double eps, const EmbeddingOptions& o = {}) {
    o.validate();
    std::vector<detail::RayMesh> meshes;
    try {
        meshes.push_back(detail::build_ray_mesh(Z, eps, o));
    } catch (const RayOverrun& e) {
        return detail::overrun_failure(0, e.what());
    }
    const std::size_t ns = o.s_samples;
    return detail::mesh_check(meshes, [ns](const detail::QuadRef& a, const detail::QuadRef& b) {
        const std::size_t d = a.i > b.i ? a.i - b.i : b.i - a.i;
        return std::min(d, ns - d) <= 1;
    });
}

/// Pairwise test between the ray-map images of different configurations.
inline OverlapResult overlap_check(std::span<const Configuration> Zs, double eps,
                                   const EmbeddingOptions& o = {}) {
    o.validate();
    std::vector<detail::RayMesh> meshes;
    for (std::size_t k = 0; k < Zs.size(); ++k) {
        try {
            meshes.push_back(detail::build_ray_mesh(Zs[k], eps, o));
        } catch (const RayOverrun& e) {
            return detail::overrun_failure(k, e.what());
        }
    }
    return detail::mesh_check(meshes, [](const detail::QuadRef& a, const detail::QuadRef& b) {
        return a.mesh == b.mesh;
    });
}

}  // namespace mesomem
