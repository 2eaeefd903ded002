#pragma once

// CSV and JSON serialization of sweep, recovery, profile and curve-energy results.

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mesomem/energy.hpp"
#include "mesomem/io.hpp"
#include "mesomem/minimize.hpp"
#include "mesomem/recovery.hpp"

namespace mesomem {

using Json = nlohmann::ordered_json;

// --- profile table ---------------------------------------------------------------

struct ProfileRow {
    double r = 0.0, q = 0.0, q_slope = 0.0;
    /// (sqrt 2/eps)|1 - a(threshold(q)) q| - q'
    double equipartition_residual = 0.0;
};

/// n samples of the optimal profile on [rmin, rmax] (both ends included).
inline std::vector<ProfileRow> profile_table(const ModelParams& p, double rmin, double rmax, std::size_t n) {
    p.validate();
    if (n < 2) throw DomainError("profile table needs at least 2 samples");
    if (!(rmax > rmin)) throw DomainError("rmax must exceed rmin");
    std::vector<ProfileRow> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = rmin + (rmax - rmin) * static_cast<double>(i) / static_cast<double>(n - 1);
        const ProfileValue v = optimal_profile(r, p);
        rows[i] = {r, v.q, v.slope, std::numbers::sqrt2 / p.eps * std::abs(v.well_residual) - v.slope};
    }
    return rows;
}

inline void write_profile_csv(std::ostream& out, const std::vector<ProfileRow>& rows) {
    out << "r,q,q_slope,equipartition_residual\n";
    for (const auto& w : rows)
        out << format_number(w.r) << ',' << format_number(w.q) << ',' << format_number(w.q_slope) << ','
            << format_number(w.equipartition_residual) << '\n';
}

// --- sweep ------------------------------------------------------------------

inline const char* sweep_csv_header() { return "eps,min_energy,profile_energy,limit_energy,gap,iters,seconds"; }

inline void write_sweep_csv(std::ostream& out, const SweepReport& rep) {
    out << sweep_csv_header() << '\n';
    for (const auto& r : rep.records)
        out << format_number(r.eps) << ',' << format_number(r.min_energy) << ',' << format_number(r.profile_energy)
            << ',' << format_number(r.limit_energy) << ',' << format_number(r.gap) << ',' << r.iters << ','
            << format_number(r.seconds) << '\n';
}

inline Json sweep_json(const SweepReport& rep) {
    Json j;
    j["records"] = Json::array();
    for (const auto& r : rep.records)
        j["records"].push_back({{"eps", r.eps},
                                {"min_energy", r.min_energy},
                                {"profile_energy", r.profile_energy},
                                {"limit_energy", r.limit_energy},
                                {"gap", r.gap},
                                {"iters", r.iters},
                                {"seconds", r.seconds}});
    j["warnings"] = rep.warnings;
    return j;
}

// --- recovery -----------------------------------------------------------------

inline const char* recovery_csv_header() {
    return "eps,r,t,res1,res2,E_part,G_part,total,limit_quarter,limit_half,gap";
}

inline void write_recovery_csv(std::ostream& out, const RecoveryReport& rep) {
    out << recovery_csv_header() << '\n';
    for (const auto& r : rep.records)
        out << format_number(r.eps) << ',' << format_number(r.r) << ',' << format_number(r.t) << ','
            << format_number(r.res1) << ',' << format_number(r.res2) << ',' << format_number(r.E_part) << ','
            << format_number(r.G_part) << ',' << format_number(r.total) << ',' << format_number(r.limit_quarter)
            << ',' << format_number(r.limit_half) << ',' << format_number(r.gap) << '\n';
}

/// Records mirror the CSV columns; per-record diagnostics are kept alongside.
inline Json recovery_json(const RecoveryReport& rep) {
    Json j;
    j["records"] = Json::array();
    j["diagnostics"] = Json::array();
    for (const auto& r : rep.records) {
        j["records"].push_back({{"eps", r.eps},
                                {"r", r.r},
                                {"t", r.t},
                                {"res1", r.res1},
                                {"res2", r.res2},
                                {"E_part", r.E_part},
                                {"G_part", r.G_part},
                                {"total", r.total},
                                {"limit_quarter", r.limit_quarter},
                                {"limit_half", r.limit_half},
                                {"gap", r.gap}});
        Json d = {{"eps", r.eps},
                  {"converged", r.converged},
                  {"message", r.message},
                  {"nodes", r.nodes},
                  {"mass_scale0", r.mass_scale0},
                  {"mass_scale1", r.mass_scale1},
                  {"off_jump_well", r.tail},
                  {"seconds", r.seconds}};
        d["embedded"] = r.embedded ? Json(*r.embedded) : Json(nullptr);
        j["diagnostics"].push_back(d);
    }
    j["limit"] = {{"elastica_quarter", rep.limit.elastica_quarter},
                  {"elastica_half", rep.limit.elastica_half},
                  {"line_tension", rep.limit.line_tension}};
    j["targets"] = {{"m1", rep.targets.m1}, {"m2", rep.targets.m2}};
    j["delta"] = rep.delta;
    j["tail_delta"] = rep.tail_delta;
    j["origin_shift"] = rep.origin_shift;
    return j;
}

// --- curve energies ---------------------------------------------------------------

inline Json embedding_json(const EmbeddingResult& e) {
    Json j = {{"pass", e.pass}, {"sampled", true}};
    if (e.witness) {
        const auto& w = *e.witness;
        j["witness"] = {{"config_a", w.config_a}, {"config_b", w.config_b}, {"s_a", w.s_a},
                        {"s_b", w.s_b},           {"x", w.point.x},         {"y", w.point.y},
                        {"reason", w.reason}};
    }
    return j;
}

/// Per-configuration energies, masses, the F~ - F residual and the embedding check,
/// plus the family sums and the pairwise overlap check.
inline Json curve_energy_json(std::span<const Configuration> Zs, const ModelParams& p,
                              const std::optional<MassPair>& targets, const EmbeddingOptions& eo = {}) {
    Json j;
    j["eps"] = p.eps;
    j["c"] = p.c;
    j["sigma"] = p.sigma;
    j["configurations"] = Json::array();
    for (const Configuration& Z : Zs) {
        const double E = separation_energy(Z, p);
        const double G = bending_energy(Z, p);
        const double F = reduced_full_energy(Z, p);
        const double Ft = primitive_energy(Z, p);
        const MassPair m = phase_masses(Z);
        j["configurations"].push_back({{"nodes", Z.size()},
                                       {"length", Z.curve().length()},
                                       {"E", E},
                                       {"G", G},
                                       {"rescaled", E + G},
                                       {"F", F},
                                       {"F_tilde", Ft},
                                       {"F_tilde_minus_F", Ft - F},
                                       {"m1", m.m1},
                                       {"m2", m.m2},
                                       {"embedding", embedding_json(embedding_check(Z, p.eps, eo))}});
    }
    const FamilyReport fr = family_energy(Zs, p, targets.value_or(MassPair{}), eo);
    Json fam = {{"value", fr.value},
                {"separation", fr.separation},
                {"bending", fr.bending},
                {"m1", fr.masses.m1},
                {"m2", fr.masses.m2}};
    if (targets)
        fam["residuals"] = {{"m1", fr.residuals.m1}, {"m2", fr.residuals.m2}};
    else
        fam["residuals"] = nullptr;
    fam["overlap"] = embedding_json(fr.overlap);
    j["family"] = fam;
    return j;
}

}  // namespace mesomem
