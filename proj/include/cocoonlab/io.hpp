#pragma once

// Dataset serialization (CSV and JSON) and static SVG scatter plots.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cocoonlab/bifurcation.hpp"
#include "cocoonlab/errors.hpp"
#include "cocoonlab/operator.hpp"
#include "cocoonlab/sweep.hpp"

namespace cocoonlab {

inline constexpr int dataset_schema_version = 1;
inline constexpr std::string_view artifact_version = "1.0.0";

enum class Format { Csv, Json };

/// Ordered key/value echo of the run configuration written into JSON headers.
using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

/// Shortest decimal that parses back to the same double; -0 prints as 0.
inline std::string format_number(double x) {
    if (x == 0.0) x = 0.0;
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline double parse_number(std::string_view s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::invalid_argument("parse: bad number '" + std::string(s) + "'");
    return v;
}

inline long parse_integer(std::string_view s) {
    long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::invalid_argument("parse: bad integer '" + std::string(s) + "'");
    return v;
}

inline std::string to_string(Boundary b) { return b == Boundary::Periodic ? "periodic" : "open"; }

inline Boundary parse_boundary(std::string_view s) {
    if (s == "periodic") return Boundary::Periodic;
    if (s == "open") return Boundary::Open;
    throw std::invalid_argument("boundary must be 'periodic' or 'open', got '" + std::string(s) + "'");
}

/// "harper", "constant:c" or "random:seed:W".
inline std::string to_string(const PotentialKind& p) {
    if (std::holds_alternative<HarperPotential>(p)) return "harper";
    if (const auto* c = std::get_if<ConstantPotential>(&p)) return "constant:" + format_number(c->c);
    const auto& r = std::get<RandomPotential>(p);
    return "random:" + std::to_string(r.seed) + ":" + format_number(r.width);
}

inline PotentialKind parse_potential(std::string_view s) {
    if (s == "harper") return HarperPotential{};
    const auto starts = [&](std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; };
    if (starts("constant:")) return ConstantPotential{parse_number(s.substr(9))};
    if (starts("random:")) {
        const auto rest = s.substr(7);
        const auto colon = rest.find(':');
        if (colon == std::string_view::npos) throw std::invalid_argument("potential: expected random:seed:W");
        std::uint64_t seed = 0;
        const auto seed_str = rest.substr(0, colon);
        const auto res = std::from_chars(seed_str.data(), seed_str.data() + seed_str.size(), seed);
        if (res.ec != std::errc{} || res.ptr != seed_str.data() + seed_str.size())
            throw std::invalid_argument("potential: bad seed '" + std::string(seed_str) + "'");
        return RandomPotential{seed, parse_number(rest.substr(colon + 1))};
    }
    throw std::invalid_argument("potential must be harper, constant:c or random:seed:W, got '" + std::string(s) + "'");
}

inline constexpr std::string_view flux_csv_header = "q,p,eigen_index,re,im";
inline constexpr std::string_view g_csv_header = "g,q,p,eigen_index,re,im";

inline std::string flux_rows_csv(const std::vector<SweepPoint>& points) {
    std::string out;
    out.reserve(points.size() * 40 + 32);
    out += flux_csv_header;
    out += '\n';
    for (const auto& pt : points) {
        out += std::to_string(pt.q);
        out += ',';
        out += std::to_string(pt.p);
        out += ',';
        out += std::to_string(pt.eigen_index);
        out += ',';
        out += format_number(pt.re);
        out += ',';
        out += format_number(pt.im);
        out += '\n';
    }
    return out;
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::vector<std::string_view> lines(std::string_view text) {
    std::vector<std::string_view> out;
    for (auto l : split(text, '\n'))
        if (!l.empty()) out.push_back(l);
    return out;
}

inline nlohmann::ordered_json echo_json(const ConfigEcho& echo) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : echo) j[k] = v;
    return j;
}

}  // namespace detail

inline std::vector<SweepPoint> parse_flux_csv(std::string_view text) {
    const auto ls = detail::lines(text);
    if (ls.empty() || ls.front() != flux_csv_header) throw std::invalid_argument("flux csv: missing header");
    std::vector<SweepPoint> pts;
    pts.reserve(ls.size() - 1);
    for (std::size_t i = 1; i < ls.size(); ++i) {
        const auto f = detail::split(ls[i], ',');
        if (f.size() != 5) throw std::invalid_argument("flux csv: expected 5 fields on line " + std::to_string(i + 1));
        pts.push_back({parse_integer(f[0]), parse_integer(f[1]), static_cast<std::size_t>(parse_integer(f[2])),
                       parse_number(f[3]), parse_number(f[4])});
    }
    return pts;
}

inline ConfigEcho dataset_echo(const SweepDataset& d) {
    return {{"L", std::to_string(d.L)},
            {"g", format_number(d.g)},
            {"boundary", to_string(d.boundary)},
            {"potential", to_string(d.potential)}};
}

/// CSV: exactly the rows. JSON: header (schema version, artifact version,
/// config echo) plus the same columns and rows.
inline std::string serialize_dataset(const SweepDataset& d, Format format, const ConfigEcho& extra = {}) {
    if (format == Format::Csv) return flux_rows_csv(d.points);
    nlohmann::ordered_json j;
    j["schema_version"] = dataset_schema_version;
    j["artifact_version"] = artifact_version;
    ConfigEcho echo = dataset_echo(d);
    echo.insert(echo.end(), extra.begin(), extra.end());
    j["config"] = detail::echo_json(echo);
    j["columns"] = {"q", "p", "eigen_index", "re", "im"};
    auto rows = nlohmann::ordered_json::array();
    for (const auto& pt : d.points) rows.push_back({pt.q, pt.p, pt.eigen_index, pt.re, pt.im});
    j["rows"] = std::move(rows);
    return j.dump(1) + "\n";
}

/// Inverse of serialize_dataset(d, Format::Json) for the dataset fields
/// (cell statuses are not serialized).
inline SweepDataset parse_dataset_json(std::string_view text) {
    const auto j = nlohmann::ordered_json::parse(text);
    if (j.at("schema_version").get<int>() != dataset_schema_version)
        throw std::invalid_argument("dataset json: unsupported schema version");
    SweepDataset d;
    const auto& c = j.at("config");
    d.L = parse_integer(c.at("L").get<std::string>());
    d.g = parse_number(c.at("g").get<std::string>());
    d.boundary = parse_boundary(c.at("boundary").get<std::string>());
    d.potential = parse_potential(c.at("potential").get<std::string>());
    for (const auto& r : j.at("rows"))
        d.points.push_back({r.at(0).get<long>(), r.at(1).get<long>(), r.at(2).get<std::size_t>(),
                            r.at(3).get<double>(), r.at(4).get<double>()});
    return d;
}

inline std::string serialize_dataset(const GSweepDataset& d, Format format, const ConfigEcho& extra = {}) {
    if (format == Format::Csv) {
        std::string out(g_csv_header);
        out += '\n';
        for (const auto& s : d.slices) {
            const std::string g = format_number(s.g);
            for (const auto& pt : s.points) {
                out += g;
                out += ',' + std::to_string(pt.q) + ',' + std::to_string(pt.p) + ',' + std::to_string(pt.eigen_index);
                out += ',' + format_number(pt.re) + ',' + format_number(pt.im) + '\n';
            }
        }
        return out;
    }
    nlohmann::ordered_json j;
    j["schema_version"] = dataset_schema_version;
    j["artifact_version"] = artifact_version;
    ConfigEcho echo{{"L", std::to_string(d.L)}, {"q", std::to_string(d.q)}};
    echo.insert(echo.end(), extra.begin(), extra.end());
    j["config"] = detail::echo_json(echo);
    j["columns"] = {"g", "q", "p", "eigen_index", "re", "im"};
    auto rows = nlohmann::ordered_json::array();
    for (const auto& s : d.slices)
        for (const auto& pt : s.points) rows.push_back({s.g, pt.q, pt.p, pt.eigen_index, pt.re, pt.im});
    j["rows"] = std::move(rows);
    auto counts = nlohmann::ordered_json::array();
    for (const auto& s : d.slices) counts.push_back({s.g, s.complex_count});
    j["complex_counts"] = std::move(counts);
    return j.dump(1) + "\n";
}

inline std::string serialize_events(const std::vector<BifurcationEvent>& events, Format format) {
    if (format == Format::Csv) {
        std::string out = "g_lo,g_hi,g_critical,count_before,count_after,resolved,seed_re,seed_im\n";
        for (const auto& e : events) {
            out += format_number(e.g_lo) + ',' + format_number(e.g_hi) + ',' + format_number(e.g_critical) + ',';
            out += std::to_string(e.count_before) + ',' + std::to_string(e.count_after) + ',';
            out += std::string(e.resolved ? "1" : "0") + ',';
            out += format_number(e.seed_eigenvalue.real()) + ',' + format_number(e.seed_eigenvalue.imag()) + '\n';
        }
        return out;
    }
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& e : events) {
        j.push_back({{"g_lo", e.g_lo},
                     {"g_hi", e.g_hi},
                     {"g_critical", e.g_critical},
                     {"count_before", e.count_before},
                     {"count_after", e.count_after},
                     {"resolved", e.resolved},
                     {"seed_re", e.seed_eigenvalue.real()},
                     {"seed_im", e.seed_eigenvalue.imag()}});
    }
    return j.dump(1) + "\n";
}

inline std::string serialize_trace(const PitchforkTrace& t, Format format) {
    if (format == Format::Csv) {
        std::string out = "g,track,re,im\n";
        for (std::size_t i = 0; i < t.g_grid.size(); ++i)
            for (std::size_t k = 0; k < 4; ++k)
                out += format_number(t.g_grid[i]) + ',' + std::to_string(k) + ',' +
                       format_number(t.tracks[k][i].real()) + ',' + format_number(t.tracks[k][i].imag()) + '\n';
        return out;
    }
    nlohmann::ordered_json j;
    j["g_critical"] = t.g_critical ? nlohmann::ordered_json(*t.g_critical) : nlohmann::ordered_json(nullptr);
    j["columns"] = {"g", "track", "re", "im"};
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < t.g_grid.size(); ++i)
        for (std::size_t k = 0; k < 4; ++k)
            rows.push_back({t.g_grid[i], k, t.tracks[k][i].real(), t.tracks[k][i].imag()});
    j["rows"] = std::move(rows);
    return j.dump(1) + "\n";
}

inline std::string serialize_spectrum(const Spectrum& s, Format format) {
    if (format == Format::Csv) {
        std::string out = "re,im\n";
        for (const auto& z : s.eigenvalues) out += format_number(z.real()) + ',' + format_number(z.imag()) + '\n';
        return out;
    }
    nlohmann::ordered_json j;
    j["max_residual"] = s.max_residual;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& z : s.eigenvalues) rows.push_back({z.real(), z.imag()});
    j["columns"] = {"re", "im"};
    j["rows"] = std::move(rows);
    return j.dump(1) + "\n";
}

// ---------------------------------------------------------------------------
// SVG

struct PlotStyle {
    double width = 640.0;
    double height = 480.0;
    double radius = 1.2;
    std::string color = "#1f3b8c";
};

struct Series {
    std::vector<std::pair<double, double>> points;
    std::string color;  // empty: style colour
};

struct Panel {
    std::vector<Series> series;
    std::string title;
    std::string x_label;
    std::string y_label;
};

struct AxisRange {
    double lo = 0.0;
    double hi = 1.0;
    double step = 0.2;
};

/// Axis limits snapped outward to a 1-2-5 tick step (about five intervals).
inline AxisRange nice_axis(double lo, double hi) {
    if (hi < lo) std::swap(lo, hi);
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(lo))) {
        const double pad = std::max(0.5, 0.5 * std::abs(lo));
        lo -= pad;
        hi += pad;
    }
    const double raw = (hi - lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double frac = raw / mag;
    const double step = (frac <= 1.0 ? 1.0 : frac <= 2.0 ? 2.0 : frac <= 5.0 ? 5.0 : 10.0) * mag;
    AxisRange a;
    a.step = step;
    a.lo = std::floor(lo / step + 1e-9) * step;
    a.hi = std::ceil(hi / step - 1e-9) * step;
    return a;
}

namespace detail {

inline std::string fixed(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string tick_label(double v, double step) {
    if (std::abs(v) < 1e-9 * step) v = 0.0;
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline void render_panel(std::string& out, const Panel& panel, const PlotStyle& style, double x0, double y0,
                         double w, double h) {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const auto& s : panel.series)
        for (const auto& [x, y] : s.points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    const AxisRange ax = nice_axis(xmin, xmax);
    const AxisRange ay = nice_axis(ymin, ymax);
    constexpr double ml = 64.0, mr = 16.0, mt = 32.0, mb = 48.0;
    const double pw = w - ml - mr;
    const double ph = h - mt - mb;
    const auto sx = [&](double x) { return x0 + ml + (x - ax.lo) / (ax.hi - ax.lo) * pw; };
    const auto sy = [&](double y) { return y0 + mt + (ay.hi - y) / (ay.hi - ay.lo) * ph; };

    out += "<rect x=\"" + fixed(x0 + ml) + "\" y=\"" + fixed(y0 + mt) + "\" width=\"" + fixed(pw) + "\" height=\"" +
           fixed(ph) + "\" fill=\"none\" stroke=\"#000\" stroke-width=\"1\"/>\n";
    const auto xticks = static_cast<int>(std::lround((ax.hi - ax.lo) / ax.step));
    for (int i = 0; i <= xticks; ++i) {
        const double v = ax.lo + i * ax.step;
        const double px = sx(v);
        out += "<line x1=\"" + fixed(px) + "\" y1=\"" + fixed(y0 + mt + ph) + "\" x2=\"" + fixed(px) + "\" y2=\"" +
               fixed(y0 + mt + ph + 5) + "\" stroke=\"#000\"/>\n";
        out += "<text x=\"" + fixed(px) + "\" y=\"" + fixed(y0 + mt + ph + 18) +
               "\" font-size=\"11\" text-anchor=\"middle\">" + tick_label(v, ax.step) + "</text>\n";
    }
    const auto yticks = static_cast<int>(std::lround((ay.hi - ay.lo) / ay.step));
    for (int i = 0; i <= yticks; ++i) {
        const double v = ay.lo + i * ay.step;
        const double py = sy(v);
        out += "<line x1=\"" + fixed(x0 + ml - 5) + "\" y1=\"" + fixed(py) + "\" x2=\"" + fixed(x0 + ml) +
               "\" y2=\"" + fixed(py) + "\" stroke=\"#000\"/>\n";
        out += "<text x=\"" + fixed(x0 + ml - 8) + "\" y=\"" + fixed(py + 4) +
               "\" font-size=\"11\" text-anchor=\"end\">" + tick_label(v, ay.step) + "</text>\n";
    }
    if (!panel.title.empty())
        out += "<text x=\"" + fixed(x0 + ml + pw / 2) + "\" y=\"" + fixed(y0 + 20) +
               "\" font-size=\"13\" text-anchor=\"middle\">" + escape(panel.title) + "</text>\n";
    if (!panel.x_label.empty())
        out += "<text x=\"" + fixed(x0 + ml + pw / 2) + "\" y=\"" + fixed(y0 + h - 8) +
               "\" font-size=\"12\" text-anchor=\"middle\">" + escape(panel.x_label) + "</text>\n";
    if (!panel.y_label.empty()) {
        const double cx = x0 + 16, cy = y0 + mt + ph / 2;
        out += "<text x=\"" + fixed(cx) + "\" y=\"" + fixed(cy) + "\" font-size=\"12\" text-anchor=\"middle\" " +
               "transform=\"rotate(-90 " + fixed(cx) + " " + fixed(cy) + ")\">" + escape(panel.y_label) + "</text>\n";
    }
    for (const auto& s : panel.series) {
        const std::string& color = s.color.empty() ? style.color : s.color;
        out += "<g fill=\"" + escape(color) + "\">\n";
        for (const auto& [x, y] : s.points)
            out += "<circle cx=\"" + fixed(sx(x)) + "\" cy=\"" + fixed(sy(y)) + "\" r=\"" + fixed(style.radius) +
                   "\"/>\n";
        out += "</g>\n";
    }
}

}  // namespace detail

/// Panels laid out left to right in one standalone SVG document. Output
/// depends only on the input, byte for byte.
inline std::string emit_panels_svg(const std::vector<Panel>& panels, const PlotStyle& style = {}) {
    std::size_t total = 0;
    for (const auto& p : panels)
        for (const auto& s : p.series) {
            total += s.points.size();
            for (const auto& [x, y] : s.points)
                if (!std::isfinite(x) || !std::isfinite(y))
                    throw std::invalid_argument("svg: non-finite coordinate");
        }
    if (panels.empty() || total == 0) throw numerical_error("svg: nothing to plot");
    for (const auto& p : panels) {
        std::size_t n = 0;
        for (const auto& s : p.series) n += s.points.size();
        if (n == 0) throw numerical_error("svg: empty panel");
    }

    const double w = style.width * static_cast<double>(panels.size());
    std::string out;
    out.reserve(total * 56 + 4096);
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::fixed(w) + "\" height=\"" +
           detail::fixed(style.height) + "\" viewBox=\"0 0 " + detail::fixed(w) + " " + detail::fixed(style.height) +
           "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
    for (std::size_t i = 0; i < panels.size(); ++i)
        detail::render_panel(out, panels[i], style, style.width * static_cast<double>(i), 0.0, style.width,
                             style.height);
    out += "</svg>\n";
    return out;
}

inline std::string emit_scatter_svg(const std::vector<std::pair<double, double>>& points, const PlotStyle& style = {},
                                    std::string title = {}, std::string x_label = {}, std::string y_label = {}) {
    Panel p;
    p.series.push_back({points, {}});
    p.title = std::move(title);
    p.x_label = std::move(x_label);
    p.y_label = std::move(y_label);
    return emit_panels_svg({p}, style);
}

}  // namespace cocoonlab
