#pragma once

// Command-line front end: cocoonlab <subcommand> [flags].

#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cocoonlab/bifurcation.hpp"
#include "cocoonlab/errors.hpp"
#include "cocoonlab/io.hpp"
#include "cocoonlab/parallel.hpp"
#include "cocoonlab/sweep.hpp"
#include "cocoonlab/symmetry.hpp"

namespace cocoonlab {

enum ExitCode : int { exit_ok = 0, exit_verify_failed = 1, exit_usage = 2, exit_numerical = 3 };

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string subcommand;
    std::optional<long> L;
    std::optional<long> q;
    std::optional<long> p;
    std::optional<double> g;
    std::optional<double> g_min;
    std::optional<double> g_max;
    std::optional<double> g_step;
    std::string boundary = "periodic";
    std::string potential = "harper";
    std::optional<double> tol_im;
    std::optional<double> scan_step;
    std::optional<double> refine_tol;
    std::size_t max_events = 0;
    std::optional<std::size_t> workers;
    std::string out;
    std::string svg;
    std::string format = "csv";
    std::string grid = "small";
    std::uint64_t seed = 20240611;
    std::string config;

    /// Everything that can influence output bytes. Worker count and output
    /// paths are deliberately left out.
    ConfigEcho echo() const {
        ConfigEcho e{{"subcommand", subcommand}};
        const auto opt_l = [&](const char* k, const std::optional<long>& v) {
            if (v) e.emplace_back(k, std::to_string(*v));
        };
        const auto opt_d = [&](const char* k, const std::optional<double>& v) {
            if (v) e.emplace_back(k, format_number(*v));
        };
        opt_l("q", q);
        opt_l("p", p);
        opt_d("g-min", g_min);
        opt_d("g-max", g_max);
        opt_d("g-step", g_step);
        opt_d("tol-im", tol_im);
        opt_d("scan-step", scan_step);
        opt_d("refine-tol", refine_tol);
        return e;
    }
};

namespace detail {

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// Flat key=value file turned into "--key value" arguments. Blank lines and
/// lines starting with '#' are skipped.
inline std::vector<std::string> config_arguments(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw usage_error("cannot read config file '" + path + "'");
    std::vector<std::string> args;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw usage_error("config " + path + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        while (!key.empty() && key[0] == '-') key.erase(0, 1);
        if (key.empty() || key == "config")
            throw usage_error("config " + path + ":" + std::to_string(lineno) + ": bad key");
        args.push_back("--" + key + "=" + trim(line.substr(eq + 1)));
    }
    return args;
}

/// Finds --config in the raw arguments (either "--config x" or "--config=x").
inline std::optional<std::string> find_config(const std::vector<std::string>& args) {
    std::optional<std::string> path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw usage_error("--config needs a path");
            path = args[i + 1];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        }
    }
    return path;
}

class Output {
public:
    explicit Output(const std::string& path, std::ostream& fallback) : fallback_(&fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
            if (!*file_) throw usage_error("cannot write '" + path + "'");
        }
    }
    void write(const std::string& bytes) {
        std::ostream& os = file_ ? *file_ : *fallback_;
        os << bytes;
        os.flush();
        if (!os) throw usage_error("write failed");
    }

private:
    std::ostream* fallback_;
    std::unique_ptr<std::ofstream> file_;
};

inline Format parse_format(const std::string& f) {
    if (f == "csv") return Format::Csv;
    if (f == "json") return Format::Json;
    throw usage_error("format must be csv or json");
}

inline void require_positive(const std::optional<double>& v, const char* name) {
    if (v && !(*v > 0.0)) throw usage_error(std::string(name) + " must be positive");
}

inline std::vector<std::pair<double, double>> project(const SweepDataset& d, bool imaginary) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(d.points.size());
    for (const auto& pt : d.points)
        pts.emplace_back(static_cast<double>(pt.q) / static_cast<double>(d.L), imaginary ? pt.im : pt.re);
    return pts;
}

inline const std::array<const char*, 4> track_colors = {"#1f3b8c", "#c0392b", "#27ae60", "#8e44ad"};

struct Context {
    RunConfig cfg;
    std::ostream& out;
    std::ostream& err;
};

inline int finish_sweep(bool complete, std::ostream& err) {
    if (complete) return exit_ok;
    err << "error: one or more cells failed to converge (see dataset cell statuses)\n";
    return exit_numerical;
}

inline int cmd_spectrum(Context& ctx) {
    const auto& c = ctx.cfg;
    OperatorSpec spec = harper_spec(c.L.value_or(50), c.q.value_or(0), c.p.value_or(0), c.g.value_or(0.0),
                                    parse_boundary(c.boundary), parse_potential(c.potential));
    const Format fmt = parse_format(c.format);
    Output out(c.out, ctx.out);
    const Spectrum s = spectrum_for(spec);
    out.write(serialize_spectrum(s, fmt));
    if (!c.svg.empty()) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& z : s.eigenvalues) pts.emplace_back(z.real(), z.imag());
        Output svg(c.svg, ctx.out);
        svg.write(emit_scatter_svg(pts, {}, "spectrum", "Re E", "Im E"));
    }
    return exit_ok;
}

inline int cmd_flux(Context& ctx, bool imaginary) {
    const auto& c = ctx.cfg;
    const long L = c.L.value_or(50);
    const Format fmt = parse_format(c.format);
    Output out(c.out, ctx.out);
    std::optional<Output> svg;
    if (!c.svg.empty()) svg.emplace(c.svg, ctx.out);

    std::vector<long> fluxes, momenta;
    if (c.q) fluxes.push_back(*c.q);
    if (c.p) momenta.push_back(*c.p);
    SweepOptions opt;
    opt.workers = c.workers;
    const SweepDataset d = flux_sweep(L, c.g.value_or(0.0), parse_boundary(c.boundary), fluxes, momenta,
                                      parse_potential(c.potential), opt);
    out.write(serialize_dataset(d, fmt, c.echo()));
    if (svg)
        svg->write(emit_scatter_svg(project(d, imaginary), {}, imaginary ? "Im E" : "Re E", "flux q/L",
                                    imaginary ? "Im E" : "Re E"));
    return finish_sweep(d.complete(), ctx.err);
}

inline int cmd_fan(Context& ctx) {
    const auto& c = ctx.cfg;
    const long L = c.L.value_or(50);
    const Format fmt = parse_format(c.format);
    Output out(c.out, ctx.out);
    std::optional<Output> svg;
    if (!c.svg.empty()) svg.emplace(c.svg, ctx.out);

    const auto grid = make_grid(c.g_min.value_or(0.0), c.g_max.value_or(0.5), c.g_step.value_or(0.005));
    std::vector<long> momenta;
    if (c.p) momenta.push_back(*c.p);
    GSweepOptions opt;
    opt.workers = c.workers;
    opt.tol_im = c.tol_im;
    const GSweepDataset d = g_sweep(L, c.q.value_or(1), grid, momenta, opt);
    out.write(serialize_dataset(d, fmt, c.echo()));
    if (svg) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& s : d.slices)
            for (const auto& pt : s.points) pts.emplace_back(s.g, pt.im);
        svg->write(emit_scatter_svg(pts, {}, "Im E vs g", "g", "Im E"));
    }
    return finish_sweep(d.complete(), ctx.err);
}

inline int cmd_pitchfork(Context& ctx) {
    const auto& c = ctx.cfg;
    const long L = c.L.value_or(50);
    const Format fmt = parse_format(c.format);
    Output out(c.out, ctx.out);
    std::optional<Output> svg;
    if (!c.svg.empty()) svg.emplace(c.svg, ctx.out);

    const auto grid = make_grid(c.g_min.value_or(0.0), c.g_max.value_or(0.05), c.g_step.value_or(5e-4));
    const PitchforkTrace t = pitchfork_trace(L, c.q.value_or(1), c.p.value_or(0), grid);
    out.write(serialize_trace(t, fmt));
    if (svg) {
        Panel re{{}, "Re E", "g", "Re E"}, im{{}, "Im E", "g", "Im E"};
        for (std::size_t k = 0; k < 4; ++k) {
            Series sr{{}, track_colors[k]}, si{{}, track_colors[k]};
            for (std::size_t i = 0; i < t.g_grid.size(); ++i) {
                sr.points.emplace_back(t.g_grid[i], t.tracks[k][i].real());
                si.points.emplace_back(t.g_grid[i], t.tracks[k][i].imag());
            }
            re.series.push_back(std::move(sr));
            im.series.push_back(std::move(si));
        }
        svg->write(emit_panels_svg({re, im}));
    }
    return exit_ok;
}

inline int cmd_critical(Context& ctx) {
    const auto& c = ctx.cfg;
    const long L = c.L.value_or(50);
    const Format fmt = parse_format(c.format);
    Output out(c.out, ctx.out);
    CriticalSearchOptions opt;
    if (c.scan_step) opt.scan_step = *c.scan_step;
    if (c.refine_tol) opt.refine_tol = *c.refine_tol;
    opt.tol_im = c.tol_im;
    opt.workers = c.workers;
    opt.max_events = c.max_events;
    std::vector<long> momenta;
    if (c.p) momenta.push_back(*c.p);
    const auto events = find_critical_g(L, c.q.value_or(1), momenta, c.g_min.value_or(0.0), c.g_max.value_or(0.5), opt);
    out.write(serialize_events(events, fmt));
    return exit_ok;
}

inline std::string describe(const SymmetryReport& r) {
    std::ostringstream os;
    os << (r.pass ? "PASS " : "FAIL ") << r.name << " L=" << r.point.L << " q=" << r.point.flux.q
       << " p=" << r.point.p << " g=" << format_number(r.point.g) << " boundary=" << to_string(r.point.boundary)
       << " distance=" << r.max_distance << " tol=" << r.tolerance;
    if (r.vector_residual) os << " vector_residual=" << *r.vector_residual << " vector_tol=" << *r.vector_tolerance;
    if (!r.note.empty()) os << " (" << r.note << ")";
    return os.str();
}

struct GridPoint {
    long L, q, p;
    double g;
};

/// small: every (q, p) of one L at g in {-0.5, 0.3}. full: 100 seeded random
/// points over L in {4, 6, 10, 50}, g in [-1, 1].
inline std::vector<GridPoint> verify_grid(const RunConfig& c) {
    std::vector<GridPoint> pts;
    if (c.grid == "small") {
        const long L = c.L.value_or(4);
        for (long q = 0; q < L; ++q)
            for (long p = 0; p < L; ++p)
                for (double g : {-0.5, 0.3}) pts.push_back({L, q, p, g});
    } else if (c.grid == "full") {
        constexpr long sizes[] = {4, 6, 10, 50};
        for (std::uint64_t i = 0; i < 100; ++i) {
            const long L = sizes[i % 4];
            const auto pick = [&](std::uint64_t stream, long n) {
                return static_cast<long>(unit_uniform(c.seed + stream, i) * static_cast<double>(n));
            };
            pts.push_back({L, pick(1, L), pick(2, L), 2.0 * unit_uniform(c.seed + 3, i) - 1.0});
        }
    } else {
        throw usage_error("grid must be small or full");
    }
    return pts;
}

inline int cmd_verify(Context& ctx) {
    const auto& c = ctx.cfg;
    Output out(c.out, ctx.out);
    const auto grid = verify_grid(c);
    std::vector<std::vector<SymmetryReport>> reports(grid.size());
    parallel_for(grid.size(), resolve_workers(c.workers), [&](std::size_t i) {
        const auto& pt = grid[i];
        reports[i] = symmetry_suite(pt.L, pt.q, pt.p, pt.g);
        reports[i].push_back(verify_open_bc_reality(pt.L, pt.q, pt.p, pt.g));
    });
    std::string text;
    std::size_t total = 0, failed = 0;
    for (const auto& rs : reports)
        for (const auto& r : rs) {
            ++total;
            if (!r.pass) ++failed;
            text += describe(r) + '\n';
        }
    text += "summary: " + std::to_string(total - failed) + "/" + std::to_string(total) + " checks passed over " +
            std::to_string(grid.size()) + " parameter points\n";
    out.write(text);
    return failed == 0 ? exit_ok : exit_verify_failed;
}

inline void add_common(CLI::App* sub, RunConfig& c) {
    sub->add_option("--L", c.L, "system size");
    sub->add_option("--q", c.q, "flux numerator (phi = q/L)");
    sub->add_option("--p", c.p, "momentum index (k = 2 pi p / L)");
    sub->add_option("--g", c.g, "non-Hermiticity");
    sub->add_option("--g-min", c.g_min, "lower end of the g range");
    sub->add_option("--g-max", c.g_max, "upper end of the g range");
    sub->add_option("--g-step", c.g_step, "g grid spacing");
    sub->add_option("--boundary", c.boundary, "periodic|open");
    sub->add_option("--potential", c.potential, "harper|constant:c|random:seed:W");
    sub->add_option("--tol-im", c.tol_im, "imaginary-part threshold");
    sub->add_option("--workers", c.workers, "worker threads (default COCOONLAB_WORKERS or hardware)");
    sub->add_option("--out", c.out, "output path (default stdout)");
    sub->add_option("--svg", c.svg, "SVG plot path");
    sub->add_option("--format", c.format, "csv|json");
    sub->add_option("--config", c.config, "flat key=value file; flags override it");
}

}  // namespace detail

/// Returns the process exit code; diagnostics go to `err`.
inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    detail::Context ctx{RunConfig{}, out, err};
    RunConfig& c = ctx.cfg;
    try {
        // Config lines are spliced in ahead of the command-line flags; the
        // last occurrence of an option wins.
        if (const auto path = detail::find_config(args)) {
            auto extra = detail::config_arguments(*path);
            if (args.empty()) throw usage_error("missing subcommand");
            args.insert(args.begin() + 1, extra.begin(), extra.end());
        }

        CLI::App app{"cocoonlab: spectra of the non-Hermitian Harper operator", "cocoonlab"};
        app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        app.require_subcommand(1);
        const std::vector<std::pair<const char*, const char*>> subs = {
            {"butterfly", "Re E over all flux and momentum cells"},
            {"cocoon", "Im E over all flux and momentum cells"},
            {"fan", "Im E of the momentum union along a g grid"},
            {"pitchfork", "trace one sign-related quartet through its bifurcation"},
            {"critical-g", "table of complex-count jumps in g"},
            {"spectrum", "eigenvalues at one parameter point"},
            {"verify", "symmetry checks on a parameter grid"}};
        for (const auto& [name, help] : subs) {
            auto* sub = app.add_subcommand(name, help);
            detail::add_common(sub, c);
            sub->callback([&c, n = std::string(name)] { c.subcommand = n; });
        }
        for (const char* name : {"critical-g"}) {
            auto* sub = app.get_subcommand(name);
            sub->add_option("--scan-step", c.scan_step, "coarse scan spacing");
            sub->add_option("--refine-tol", c.refine_tol, "bisection width");
            sub->add_option("--max-events", c.max_events, "stop after this many events (0: all)");
        }
        auto* verify = app.get_subcommand("verify");
        verify->add_option("--grid", c.grid, "small|full");
        verify->add_option("--seed", c.seed, "seed of the full grid");

        std::vector<std::string> reversed(args.rbegin(), args.rend());
        try {
            app.parse(reversed);
        } catch (const CLI::ParseError& e) {
            return app.exit(e, out, err) == 0 ? exit_ok : exit_usage;
        }

        if (c.workers && *c.workers < 1) throw usage_error("--workers must be at least 1");
        detail::require_positive(c.tol_im, "--tol-im");
        detail::require_positive(c.scan_step, "--scan-step");
        detail::require_positive(c.refine_tol, "--refine-tol");
        detail::require_positive(c.g_step, "--g-step");
        detail::parse_format(c.format);

        if (c.subcommand == "spectrum") return detail::cmd_spectrum(ctx);
        if (c.subcommand == "butterfly") return detail::cmd_flux(ctx, false);
        if (c.subcommand == "cocoon") return detail::cmd_flux(ctx, true);
        if (c.subcommand == "fan") return detail::cmd_fan(ctx);
        if (c.subcommand == "pitchfork") return detail::cmd_pitchfork(ctx);
        if (c.subcommand == "critical-g") return detail::cmd_critical(ctx);
        if (c.subcommand == "verify") return detail::cmd_verify(ctx);
        throw usage_error("unknown subcommand");
    } catch (const usage_error& e) {
        err << "usage error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << "\n";
        return exit_usage;
    } catch (const numerical_error& e) {
        err << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    }
}

inline int run_cli(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    return run_cli(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace cocoonlab
