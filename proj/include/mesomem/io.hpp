#pragma once

// Plain-text readers and writers for grid fields, phase maps, curves and
// configurations, and the shape specifications accepted on the command line.

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "mesomem/configuration.hpp"
#include "mesomem/curve.hpp"
#include "mesomem/grid.hpp"

namespace mesomem {

/// Shortest round-trip decimal form; infinities as "+inf"/"-inf".
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

/// Parses a finite or infinite real; throws ParseError on trailing garbage.
inline double parse_number(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    if (s == "+inf" || s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParseError("not a number: '" + std::string(s) + "'");
    return v;
}

namespace detail {

// Non-empty lines with '#' comments removed.
class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    bool next(std::vector<std::string>& tokens) {
        std::string line;
        while (std::getline(in_, line)) {
            ++lineno_;
            if (auto k = line.find('#'); k != std::string::npos) line.resize(k);
            std::istringstream ss(line);
            tokens.clear();
            for (std::string tok; ss >> tok;) tokens.push_back(tok);
            if (!tokens.empty()) return true;
        }
        return false;
    }

    std::vector<std::string> expect(std::size_t min_tokens, std::size_t max_tokens, const char* what) {
        std::vector<std::string> t;
        if (!next(t)) throw ParseError(std::string("unexpected end of input, expected ") + what);
        if (t.size() < min_tokens || t.size() > max_tokens)
            throw ParseError("line " + std::to_string(lineno_) + ": expected " + what);
        return t;
    }

    void expect_end() {
        std::vector<std::string> t;
        if (next(t)) throw ParseError("line " + std::to_string(lineno_) + ": trailing data");
    }

    std::size_t line() const noexcept { return lineno_; }

private:
    std::istream& in_;
    std::size_t lineno_ = 0;
};

inline std::size_t parse_count(const std::string& s) {
    std::size_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ParseError("not a count: '" + s + "'");
    return v;
}

inline Grid read_grid_header(LineReader& lr) {
    const auto h = lr.expect(3, 5, "grid header 'dim n_x [n_y] extent_x [extent_y]'");
    const std::size_t dim = parse_count(h[0]);
    Grid g;
    if (dim == 1 && h.size() == 3) {
        const std::size_t n = parse_count(h[1]);
        const double ext = parse_number(h[2]);
        try {
            g = Grid::line(n, ext);
        } catch (const DomainError& e) {
            throw ParseError("line " + std::to_string(lr.line()) + ": " + e.what());
        }
    } else if (dim == 2 && h.size() == 5) {
        const std::size_t nx = parse_count(h[1]), ny = parse_count(h[2]);
        const double ex = parse_number(h[3]), ey = parse_number(h[4]);
        try {
            g = Grid::rect(nx, ny, ex, ey);
        } catch (const DomainError& e) {
            throw ParseError("line " + std::to_string(lr.line()) + ": " + e.what());
        }
    } else {
        throw ParseError("grid header must be '1 n_x extent_x' or '2 n_x n_y extent_x extent_y'");
    }
    return g;
}

inline void write_grid_header(std::ostream& out, const Grid& g) {
    if (g.dim == 1)
        out << "1 " << g.n[0] << ' ' << format_number(g.extent[0]) << '\n';
    else
        out << "2 " << g.n[0] << ' ' << g.n[1] << ' ' << format_number(g.extent[0]) << ' '
            << format_number(g.extent[1]) << '\n';
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return in;
}

}  // namespace detail

// --- grid fields ----------------------------------------------------------------

inline GridField read_field(std::istream& in) {
    detail::LineReader lr(in);
    const Grid g = detail::read_grid_header(lr);
    std::vector<double> v(g.size());
    for (double& x : v) {
        x = parse_number(lr.expect(1, 1, "one value per line")[0]);
        if (!std::isfinite(x)) throw ParseError("line " + std::to_string(lr.line()) + ": non-finite value");
    }
    lr.expect_end();
    return GridField(g, std::move(v));
}

inline PhaseMap read_phase_map(std::istream& in) {
    detail::LineReader lr(in);
    const Grid g = detail::read_grid_header(lr);
    std::vector<Phase> v(g.size());
    for (Phase& x : v) {
        const auto t = lr.expect(1, 1, "one phase value per line");
        if (t[0] != "0" && t[0] != "1")
            throw ParseError("line " + std::to_string(lr.line()) + ": phase must be 0 or 1");
        x = t[0] == "1" ? 1 : 0;
    }
    lr.expect_end();
    return PhaseMap(g, std::move(v));
}

inline void write_field(std::ostream& out, const GridField& M) {
    detail::write_grid_header(out, M.grid);
    for (double v : M.values) out << format_number(v) << '\n';
}

inline void write_phase_map(std::ostream& out, const PhaseMap& chi) {
    detail::write_grid_header(out, chi.grid);
    for (Phase v : chi.values) out << int(v) << '\n';
}

inline PhaseMap read_phase_map_file(const std::string& path) {
    auto in = detail::open_input(path);
    return read_phase_map(in);
}

// --- curves -------------------------------------------------------------------

struct CurveSamples {
    std::vector<Vec2> points;
    double length = 0.0;
};

/// Header `n length`, then n lines `x y`.
inline CurveSamples read_curve_samples(std::istream& in) {
    detail::LineReader lr(in);
    const auto h = lr.expect(2, 2, "curve header 'n length'");
    CurveSamples c;
    c.points.resize(detail::parse_count(h[0]));
    c.length = parse_number(h[1]);
    for (Vec2& p : c.points) {
        const auto t = lr.expect(2, 2, "'x y'");
        p = {parse_number(t[0]), parse_number(t[1])};
    }
    lr.expect_end();
    return c;
}

/// Reads samples already at uniform arclength.
inline PeriodicCurve read_curve(std::istream& in) {
    CurveSamples c = read_curve_samples(in);
    return PeriodicCurve::from_samples(std::move(c.points), c.length);
}

inline void write_curve(std::ostream& out, const PeriodicCurve& c) {
    out << c.size() << ' ' << format_number(c.length()) << '\n';
    for (const Vec2& p : c.points()) out << format_number(p.x) << ' ' << format_number(p.y) << '\n';
}

// --- configurations ---------------------------------------------------------------

/// Header `n length`, then n lines `x y theta_x theta_y chi mass`.
inline Configuration read_configuration(std::istream& in) {
    detail::LineReader lr(in);
    const auto h = lr.expect(2, 2, "configuration header 'n length'");
    const std::size_t n = detail::parse_count(h[0]);
    const double L = parse_number(h[1]);
    std::vector<Vec2> pts(n), theta(n);
    std::vector<Phase> chi(n);
    std::vector<double> mass(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto t = lr.expect(6, 6, "'x y theta_x theta_y chi mass'");
        pts[i] = {parse_number(t[0]), parse_number(t[1])};
        theta[i] = {parse_number(t[2]), parse_number(t[3])};
        if (t[4] != "0" && t[4] != "1")
            throw ParseError("line " + std::to_string(lr.line()) + ": chi must be 0 or 1");
        chi[i] = t[4] == "1" ? 1 : 0;
        mass[i] = parse_number(t[5]);
    }
    lr.expect_end();
    return Configuration(PeriodicCurve::from_samples(std::move(pts), L), std::move(theta), std::move(chi),
                         std::move(mass));
}

inline Configuration read_configuration_file(const std::string& path) {
    auto in = detail::open_input(path);
    try {
        return read_configuration(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline void write_configuration(std::ostream& out, const Configuration& Z) {
    const PeriodicCurve& c = Z.curve();
    out << c.size() << ' ' << format_number(c.length()) << '\n';
    for (std::size_t i = 0; i < Z.size(); ++i) {
        const Vec2 p = c.points()[i], th = Z.theta()[i];
        out << format_number(p.x) << ' ' << format_number(p.y) << ' ' << format_number(th.x) << ' '
            << format_number(th.y) << ' ' << int(Z.chi()[i]) << ' ' << format_number(Z.mass()[i]) << '\n';
    }
}

// --- shape specifications ---------------------------------------------------------

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t k = 0;
    while (true) {
        const std::size_t e = s.find(sep, k);
        out.emplace_back(s.substr(k, e == std::string_view::npos ? std::string_view::npos : e - k));
        if (e == std::string_view::npos) break;
        k = e + 1;
    }
    return out;
}

/// `circle:R`, `ellipse:a:b` or `file:path` sampled at n uniform-arclength nodes.
/// File curves are resampled through their closed cubic spline.
inline PeriodicCurve parse_curve_spec(const std::string& spec, std::size_t n) {
    if (spec.rfind("file:", 0) == 0) {
        const std::string path = spec.substr(5);
        auto in = detail::open_input(path);
        CurveSamples c = read_curve_samples(in);
        return resample_arclength(c.points, n);
    }
    const auto parts = split(spec, ':');
    if (parts[0] == "circle" && parts.size() == 2) return make_circle(parse_number(parts[1]), n);
    if (parts[0] == "ellipse" && parts.size() == 3)
        return make_ellipse(parse_number(parts[1]), parse_number(parts[2]), n);
    throw ParseError("curve spec must be circle:R, ellipse:a:b or file:path, got '" + spec + "'");
}

/// `half`, `disk:r` or `file:path` (a phase map).
inline PhaseShape parse_phase_spec(const std::string& spec) {
    if (spec == "half") return PhaseShape::half();
    if (spec.rfind("disk:", 0) == 0) {
        const double r = parse_number(spec.substr(5));
        if (!(r > 0.0)) throw ParseError("disk radius must be positive");
        return PhaseShape::disk(r);
    }
    if (spec.rfind("file:", 0) == 0) return PhaseShape::from_map(read_phase_map_file(spec.substr(5)));
    throw ParseError("phase spec must be half, disk:r or file:path, got '" + spec + "'");
}

/// Comma-separated reals.
inline std::vector<double> parse_number_list(const std::string& s) {
    std::vector<double> out;
    for (const std::string& tok : split(s, ',')) out.push_back(parse_number(tok));
    return out;
}

}  // namespace mesomem
