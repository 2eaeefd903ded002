#pragma once

// Static SVG figures: line plots with axes and phase-colored curves.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "mesomem/curve.hpp"
#include "mesomem/model.hpp"

namespace mesomem::svg {

struct Series {
    std::string name;
    std::vector<double> x, y;
    std::string color = "#1f77b4";
    bool dashed = false;
    bool markers = true;
};

struct PlotOptions {
    std::string title;
    std::string xlabel, ylabel;
    bool log_x = false, log_y = false;
    int width = 640, height = 420;
};

inline std::string escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

namespace detail {

inline std::string num(double v) {
    std::ostringstream ss;
    ss.precision(6);
    ss << v;
    return ss.str();
}

inline std::string tick_label(double v, bool log) {
    std::ostringstream ss;
    ss.precision(4);
    ss << (log ? std::pow(10.0, v) : v);
    return ss.str();
}

struct Axis {
    double lo = 0.0, hi = 1.0;
    bool log = false;

    double map(double v) const { return log ? std::log10(v) : v; }
    double frac(double v) const { return (map(v) - lo) / (hi - lo); }
};

inline Axis make_axis(const std::vector<const std::vector<double>*>& data, bool log) {
    Axis a;
    a.log = log;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto* d : data)
        for (double v : *d) {
            if (!std::isfinite(v) || (log && !(v > 0.0))) continue;
            lo = std::min(lo, a.map(v));
            hi = std::max(hi, a.map(v));
        }
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    a.lo = lo - pad;
    a.hi = hi + pad;
    return a;
}

}  // namespace detail

/// Line plot of one or more series with a frame, ticks and a legend.
inline std::string line_plot(const std::vector<Series>& series, const PlotOptions& o) {
    std::vector<const std::vector<double>*> xs, ys;
    for (const Series& s : series) {
        xs.push_back(&s.x);
        ys.push_back(&s.y);
    }
    const detail::Axis ax = detail::make_axis(xs, o.log_x);
    const detail::Axis ay = detail::make_axis(ys, o.log_y);
    const double left = 80, right = 20, top = 40, bottom = 60;
    const double pw = o.width - left - right, ph = o.height - top - bottom;
    auto px = [&](double v) { return left + ax.frac(v) * pw; };
    auto py = [&](double v) { return top + (1.0 - ay.frac(v)) * ph; };
    using detail::num;

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << o.width << "\" height=\"" << o.height
        << "\" viewBox=\"0 0 " << o.width << ' ' << o.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << o.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(o.title)
        << "</text>\n";
    out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double fx = ax.lo + (ax.hi - ax.lo) * k / 4.0;
        const double x = left + pw * k / 4.0;
        out << "<line x1=\"" << num(x) << "\" y1=\"" << top + ph << "\" x2=\"" << num(x) << "\" y2=\""
            << top + ph + 5 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << num(x) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
            << escape(detail::tick_label(fx, o.log_x)) << "</text>\n";
        const double fy = ay.lo + (ay.hi - ay.lo) * k / 4.0;
        const double y = top + ph * (1.0 - k / 4.0);
        out << "<line x1=\"" << left - 5 << "\" y1=\"" << num(y) << "\" x2=\"" << left << "\" y2=\"" << num(y)
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << left - 8 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">"
            << escape(detail::tick_label(fy, o.log_y)) << "</text>\n";
    }
    out << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << o.height - 15 << "\" text-anchor=\"middle\">"
        << escape(o.xlabel) << "</text>\n";
    out << "<text x=\"18\" y=\"" << num(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << num(top + ph / 2) << ")\">" << escape(o.ylabel) << "</text>\n";

    double ly = top + 16;
    for (const Series& s : series) {
        std::ostringstream pts;
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            if ((o.log_x && !(s.x[i] > 0.0)) || (o.log_y && !(s.y[i] > 0.0))) continue;
            pts << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
        }
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
            << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"" << pts.str() << "\"/>\n";
        if (s.markers)
            for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                if ((o.log_x && !(s.x[i] > 0.0)) || (o.log_y && !(s.y[i] > 0.0))) continue;
                out << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"3\" fill=\""
                    << s.color << "\"/>\n";
            }
        out << "<line x1=\"" << left + pw - 150 << "\" y1=\"" << ly << "\" x2=\"" << left + pw - 125 << "\" y2=\""
            << ly << "\" stroke=\"" << s.color << "\" stroke-width=\"2\""
            << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
        out << "<text x=\"" << left + pw - 120 << "\" y=\"" << ly + 4 << "\">" << escape(s.name) << "</text>\n";
        ly += 16;
    }
    out << "</svg>\n";
    return out.str();
}

/// Closed curve drawn node to node, phase 1 in red and phase 0 in blue.
inline std::string phase_curve(const std::vector<Vec2>& pts, const std::vector<Phase>& chi,
                               const std::string& title, int size = 480) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const Vec2& p : pts) {
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
    }
    const double span = std::max({x1 - x0, y1 - y0, 1e-12});
    const double margin = 40;
    const double scale = (size - 2 * margin) / span;
    const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
    auto X = [&](double x) { return size / 2.0 + (x - cx) * scale; };
    auto Y = [&](double y) { return size / 2.0 - (y - cy) * scale; };
    using detail::num;

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
        << "\" viewBox=\"0 0 " << size << ' ' << size << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << size / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
        << "</text>\n";
    const std::size_t n = pts.size();
    std::size_t i = 0;
    // One polyline per maximal run of equal phase.
    while (i < n) {
        const Phase ph = chi.empty() ? Phase{1} : chi[i];
        std::ostringstream run;
        run << num(X(pts[i].x)) << ',' << num(Y(pts[i].y)) << ' ';
        std::size_t j = i;
        while (j < n && (chi.empty() || chi[j] == ph)) {
            const Vec2& q = pts[(j + 1) % n];
            run << num(X(q.x)) << ',' << num(Y(q.y)) << ' ';
            ++j;
        }
        out << "<polyline fill=\"none\" stroke=\"" << (ph ? "#d62728" : "#1f77b4")
            << "\" stroke-width=\"3\" points=\"" << run.str() << "\"/>\n";
        i = j;
    }
    out << "<text x=\"10\" y=\"" << size - 24 << "\" fill=\"#d62728\">phase 1</text>\n";
    out << "<text x=\"10\" y=\"" << size - 8 << "\" fill=\"#1f77b4\">phase 0</text>\n";
    out << "</svg>\n";
    return out.str();
}

}  // namespace mesomem::svg
