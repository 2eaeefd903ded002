// mesomem: profile tables, grid sweeps, curve energies and recovery sequences.
//
// Exit codes: 0 success, 1 numerical failure, 2 usage or input error.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mesomem/io.hpp"
#include "mesomem/report.hpp"
#include "mesomem/svg.hpp"

namespace fs = std::filesystem;
using namespace mesomem;

namespace {

constexpr int kOk = 0;
constexpr int kNumerical = 1;
constexpr int kUsage = 2;

// Replaces `--config-file path` with `--key value` pairs read from the file, so
// file keys go through the same option table as flags (unknown keys are rejected)
// and later flags override them.
std::vector<std::string> expand_config_files(int argc, char** argv) {
    std::vector<std::string> out;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a != "--config-file") {
            out.push_back(a);
            continue;
        }
        if (i + 1 >= argc) throw CLI::ArgumentMismatch("--config-file needs a path");
        const std::string path = argv[++i];
        std::ifstream in(path);
        if (!in) throw ParseError("cannot open config file '" + path + "'");
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (auto k = line.find('#'); k != std::string::npos) line.resize(k);
            const auto eq = line.find('=');
            auto trim = [](std::string s) {
                const auto b = s.find_first_not_of(" \t\r");
                const auto e = s.find_last_not_of(" \t\r");
                return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
            };
            if (trim(line).empty()) continue;
            if (eq == std::string::npos)
                throw ParseError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty() || key.find_first_not_of("abcdefghijklmnopqrstuvwxyz0123456789-") != std::string::npos)
                throw ParseError(path + ":" + std::to_string(lineno) + ": bad key '" + key + "'");
            if (value == "true") {
                out.push_back("--" + key);
            } else if (value != "false") {
                out.push_back("--" + key);
                out.push_back(value);
            }
        }
    }
    return out;
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write '" + path.string() + "'");
    out << text;
}

template <class Writer>
void write_with(const fs::path& path, Writer&& w) {
    std::ostringstream ss;
    w(ss);
    write_file(path, ss.str());
}

std::vector<Arc> parse_arcs(const std::string& spec) {
    std::vector<Arc> arcs;
    if (spec.empty()) return arcs;
    for (const std::string& item : split(spec, ',')) {
        const auto se = split(item, ':');
        if (se.size() != 2) throw ParseError("arc must be s0:s1, got '" + item + "'");
        arcs.push_back({parse_number(se[0]), parse_number(se[1])});
    }
    return arcs;
}

struct Common {
    int threads = 0;
    bool deterministic = false;
};

void apply(const Common& c) {
    ExecPolicy& pol = default_policy();
    if (c.threads > 0) pol.threads = static_cast<unsigned>(c.threads);
    pol.deterministic = c.deterministic;
}

// --- profile --------------------------------------------------------------------

struct ProfileArgs {
    double c = 0.0, eps = 0.0, rmin = -0.5, rmax = 0.5;
    std::size_t n = 1000;
    std::string out = "out/profile";
};

int run_profile(const ProfileArgs& a) {
    ModelParams p;
    p.c = a.c;
    p.eps = a.eps;
    p.validate();
    const auto rows = profile_table(p, a.rmin, a.rmax, a.n);
    const fs::path dir(a.out);
    write_with(dir / "profile.csv", [&](std::ostream& o) { write_profile_csv(o, rows); });

    svg::Series q{"q", {}, {}, "#1f77b4", false, false};
    svg::Series dq{"q' / max q'", {}, {}, "#d62728", true, false};
    double peak = 0.0;
    for (const auto& r : rows) peak = std::max(peak, r.q_slope);
    for (const auto& r : rows) {
        q.x.push_back(r.r);
        q.y.push_back(r.q);
        dq.x.push_back(r.r);
        dq.y.push_back(peak > 0.0 ? r.q_slope / peak : 0.0);
    }
    svg::PlotOptions po;
    po.title = "optimal profile, c = " + format_number(a.c) + ", eps = " + format_number(a.eps);
    po.xlabel = "r";
    po.ylabel = "value";
    write_file(dir / "profile.svg", svg::line_plot({q, dq}, po));
    std::cout << "profile: " << rows.size() << " rows -> " << (dir / "profile.csv").string() << '\n';
    return kOk;
}

// --- grid sweep --------------------------------------------------------------

struct SweepArgs {
    int dim = 1;
    std::size_t n = 64;
    double c = 1.0, extent = 1.0, cells_per_eps = 4.0, grad_tol = 1e-6;
    int max_iters = 50000;
    std::string eps_list, phase = "half", out = "out/grid-sweep";
};

int run_sweep(const SweepArgs& a, const Common& common) {
    ModelParams base;
    base.c = a.c;
    const std::vector<double> eps = parse_number_list(a.eps_list);
    for (double e : eps) base.with_eps(e).validate();
    const PhaseShape shape = parse_phase_spec(a.phase);
    if (shape.kind == PhaseShape::Kind::map && shape.map.grid.dim != a.dim)
        throw ParseError("phase file dimension does not match --dim");
    SweepOptions so;
    so.dim = a.dim;
    so.extent = a.extent;
    so.cells_per_eps = a.cells_per_eps;
    so.min_nodes = a.n;
    so.deterministic = common.deterministic;
    MinimizeOptions mo;
    mo.max_iters = a.max_iters;
    mo.grad_tol = a.grad_tol;
    const SweepReport rep = epsilon_sweep(shape, eps, base, mo, so, default_policy());
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';

    const fs::path dir(a.out);
    write_with(dir / "sweep.csv", [&](std::ostream& o) { write_sweep_csv(o, rep); });
    write_file(dir / "sweep.json", sweep_json(rep).dump(2) + "\n");

    svg::Series mn{"minimized", {}, {}, "#1f77b4"}, pr{"profile", {}, {}, "#2ca02c"},
        lim{"(c^2/sqrt 8) Per", {}, {}, "#000000", true};
    for (const auto& r : rep.records) {
        mn.x.push_back(r.eps);
        mn.y.push_back(r.min_energy);
        pr.x.push_back(r.eps);
        pr.y.push_back(r.profile_energy);
        lim.x.push_back(r.eps);
        lim.y.push_back(r.limit_energy);
    }
    svg::PlotOptions po;
    po.title = "grid energy vs eps (" + a.phase + ", " + std::to_string(a.dim) + "D)";
    po.xlabel = "eps";
    po.ylabel = "energy";
    po.log_x = true;
    write_file(dir / "sweep.svg", svg::line_plot({mn, pr, lim}, po));

    for (const auto& r : rep.records)
        std::cout << "eps=" << format_number(r.eps) << " min=" << format_number(r.min_energy)
                  << " limit=" << format_number(r.limit_energy) << " gap=" << format_number(r.gap) << '\n';
    return kOk;
}

// --- curve energy ---------------------------------------------------------------

struct CurveEnergyArgs {
    std::vector<std::string> configs;
    double c = 1.0, eps = 0.0, sigma = 1.0;
    std::string targets, out = "out/curve-energy";
    std::size_t s_samples = 512, m_samples = 16;
};

int run_curve_energy(const CurveEnergyArgs& a) {
    ModelParams p;
    p.c = a.c;
    p.eps = a.eps;
    p.sigma = a.sigma;
    p.validate();
    std::optional<MassPair> targets;
    if (!a.targets.empty()) {
        const auto t = parse_number_list(a.targets);
        if (t.size() != 2) throw ParseError("--targets needs m1,m2");
        targets = MassPair{t[0], t[1]};
    }
    std::vector<Configuration> Zs;
    for (const auto& path : a.configs) Zs.push_back(read_configuration_file(path));
    EmbeddingOptions eo;
    eo.s_samples = a.s_samples;
    eo.m_samples = a.m_samples;
    const Json j = curve_energy_json(Zs, p, targets, eo);
    const fs::path dir(a.out);
    write_file(dir / "curve_energy.json", j.dump(2) + "\n");
    std::cout << j.dump(2) << '\n';
    return kOk;
}

// --- recovery -------------------------------------------------------------------

struct RecoveryArgs {
    std::string curve = "circle:1", arcs, eps_list, out = "out/recovery";
    double c = 1.0, delta = 0.1, radius = 0.0, tail_delta = 0.0;
    std::size_t n = 16384, s_samples = 512, m_samples = 16;
    bool no_embedding = false;
};

int run_recovery(const RecoveryArgs& a, const Common& common) {
    ModelParams base;
    base.c = a.c;
    const std::vector<double> eps = parse_number_list(a.eps_list);
    for (double e : eps) base.with_eps(e).validate();
    const PeriodicCurve curve = parse_curve_spec(a.curve, a.n);
    const std::vector<Arc> arcs = parse_arcs(a.arcs);
    const PhaseCurve pc = arcs.empty() ? PhaseCurve::uniform(curve, 1) : PhaseCurve::from_arcs(curve, arcs);

    RecoveryOptions o;
    o.delta = a.delta;
    o.radius = a.radius;
    o.tail_delta = a.tail_delta;
    o.check_embedding = !a.no_embedding;
    o.embedding.s_samples = a.s_samples;
    o.embedding.m_samples = a.m_samples;
    const RecoveryReport rep = limsup_report(pc, eps, base, default_targets(pc), o, common.deterministic);

    const fs::path dir(a.out);
    write_with(dir / "recovery.csv", [&](std::ostream& os) { write_recovery_csv(os, rep); });
    write_file(dir / "recovery.json", recovery_json(rep).dump(2) + "\n");
    write_file(dir / "recovery_curve.svg", svg::phase_curve(pc.curve().points(), pc.chi(), "input curve and phases"));

    svg::Series tot{"total", {}, {}, "#1f77b4"}, E{"E part", {}, {}, "#2ca02c"}, G{"G part", {}, {}, "#9467bd"},
        q{"limit (1/4 kappa^2)", {}, {}, "#000000", true, false}, h{"limit (1/2 kappa^2)", {}, {}, "#7f7f7f", true, false};
    for (const auto& r : rep.records) {
        if (!r.converged) continue;
        tot.x.push_back(r.eps);
        tot.y.push_back(r.total);
        E.x.push_back(r.eps);
        E.y.push_back(r.E_part);
        G.x.push_back(r.eps);
        G.y.push_back(r.G_part);
        q.x.push_back(r.eps);
        q.y.push_back(r.limit_quarter);
        h.x.push_back(r.eps);
        h.y.push_back(r.limit_half);
    }
    svg::PlotOptions po;
    po.title = "recovery energy vs eps (" + a.curve + ")";
    po.xlabel = "eps";
    po.ylabel = "rescaled energy";
    po.log_x = true;
    write_file(dir / "recovery_energy.svg", svg::line_plot({tot, E, G, q, h}, po));

    for (const auto& r : rep.records) {
        std::cout << "eps=" << format_number(r.eps) << " total=" << format_number(r.total)
                  << " gap=" << format_number(r.gap) << (r.converged ? "" : " FAILED");
        if (!r.message.empty()) std::cout << " (" << r.message << ")";
        std::cout << '\n';
    }
    return rep.any_converged() ? kOk : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mesoscale membrane energies: profiles, grid sweeps, curve energies, recovery sequences"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.set_help_all_flag("--help-all", "Help for every subcommand");

    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        sub->add_option("--threads", common.threads, "Worker threads (default: MESOMEM_THREADS or all cores)")
            ->check(CLI::PositiveNumber);
        sub->add_flag("--deterministic", common.deterministic, "Single thread, zero timings; byte-identical reports");
        sub->add_option("--config-file", "File of 'key = value' lines, same keys as the flags");
    };

    ProfileArgs pa;
    auto* prof = app.add_subcommand("profile", "Tabulate the optimal transition profile");
    prof->add_option("--c", pa.c, "Line-tension strength")->required();
    prof->add_option("--eps", pa.eps, "Length scale")->required();
    prof->add_option("--rmin", pa.rmin, "Left end of the sample range");
    prof->add_option("--rmax", pa.rmax, "Right end of the sample range");
    prof->add_option("--n", pa.n, "Number of samples")->check(CLI::Range(2, 100000000));
    prof->add_option("--out", pa.out, "Output directory");
    add_common(prof);

    SweepArgs sa;
    auto* sweep = app.add_subcommand("grid-sweep", "Minimize the grid energy over an eps list");
    sweep->add_option("--dim", sa.dim, "Grid dimension")->check(CLI::IsMember({1, 2}));
    sweep->add_option("--n", sa.n, "Minimum nodes per axis")->check(CLI::Range(4, 1 << 20));
    sweep->add_option("--c", sa.c, "Line-tension strength");
    sweep->add_option("--eps-list", sa.eps_list, "Comma-separated, strictly decreasing")->required();
    sweep->add_option("--phase", sa.phase, "half | disk:r | file:path");
    sweep->add_option("--extent", sa.extent, "Domain side length");
    sweep->add_option("--cells-per-eps", sa.cells_per_eps, "Grid refinement: h <= eps / value");
    sweep->add_option("--max-iters", sa.max_iters, "Gradient iteration cap")->check(CLI::PositiveNumber);
    sweep->add_option("--grad-tol", sa.grad_tol, "Gradient norm stop")->check(CLI::PositiveNumber);
    sweep->add_option("--out", sa.out, "Output directory");
    add_common(sweep);

    CurveEnergyArgs ca;
    auto* ce = app.add_subcommand("curve-energy", "Energies and checks for configuration files");
    ce->add_option("--config", ca.configs, "Configuration file; repeat for a family")
        ->required()
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    ce->add_option("--c", ca.c, "Line-tension strength");
    ce->add_option("--eps", ca.eps, "Length scale")->required();
    ce->add_option("--sigma", ca.sigma, "Gradient weight");
    ce->add_option("--targets", ca.targets, "Family mass targets m1,m2");
    ce->add_option("--embedding-samples", ca.s_samples, "Ray samples for the embedding check")
        ->check(CLI::Range(16, 1 << 20));
    ce->add_option("--out", ca.out, "Output directory");
    add_common(ce);

    RecoveryArgs ra;
    auto* rec = app.add_subcommand("recovery", "Recovery sequence with exact mass constraints");
    rec->add_option("--curve", ra.curve, "circle:R | ellipse:a:b | file:path");
    rec->add_option("--arcs", ra.arcs, "Phase-1 arcs s0:s1[,s0:s1...]; empty means phase 1 everywhere");
    rec->add_option("--c", ra.c, "Line-tension strength");
    rec->add_option("--eps-list", ra.eps_list, "Comma-separated, strictly decreasing")->required();
    rec->add_option("--n", ra.n, "Nodes of the input curve")->check(CLI::Range(64, 1 << 22));
    rec->add_option("--delta", ra.delta, "Bump margin around jumps")->check(CLI::PositiveNumber);
    rec->add_option("--radius", ra.radius, "Admissible |r|, |t| (0: default)")->check(CLI::NonNegativeNumber);
    rec->add_option("--tail-delta", ra.tail_delta, "Distance for the off-jump well diagnostic (0: delta)")
        ->check(CLI::NonNegativeNumber);
    rec->add_option("--embedding-samples", ra.s_samples, "Ray samples for the embedding check")
        ->check(CLI::Range(16, 1 << 20));
    rec->add_flag("--no-embedding", ra.no_embedding, "Skip the embedding check");
    rec->add_option("--out", ra.out, "Output directory");
    add_common(rec);

    std::vector<std::string> args;
    try {
        args = expand_config_files(argc, argv);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    } catch (const mesomem::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }

    try {
        apply(common);
        if (*prof) return run_profile(pa);
        if (*sweep) return run_sweep(sa, common);
        if (*ce) return run_curve_energy(ca);
        if (*rec) return run_recovery(ra, common);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const mesomem::Error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    }
    return kUsage;
}
