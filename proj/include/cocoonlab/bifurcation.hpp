#pragma once

// Transitions from real to complex eigenvalues as g grows: locating them
// (bisection on the integer complex count), tracing the four eigenvalues of
// one double pitchfork, and grouping complex eigenvalues into quartets
// {E, E*, -E, -E*}.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cocoonlab/eigensolver.hpp"
#include "cocoonlab/operator.hpp"
#include "cocoonlab/parallel.hpp"
#include "cocoonlab/spectrum.hpp"
#include "cocoonlab/sweep.hpp"

namespace cocoonlab {

/// Number of eigenvalues with |Im| > tol_im. Even for any real matrix.
inline std::size_t complex_count(const Spectrum& spectrum, double tol_im) {
    if (!(tol_im > 0.0)) throw std::invalid_argument("complex_count: tol_im must be positive");
    std::size_t n = 0;
    for (const auto& z : spectrum.eigenvalues)
        if (std::abs(z.imag()) > tol_im) ++n;
    return n;
}

struct BifurcationEvent {
    double g_lo = 0.0;
    double g_hi = 0.0;
    double g_critical = 0.0;
    std::size_t count_before = 0;  // complex count at g_lo
    std::size_t count_after = 0;   // complex count at g_hi
    complex_t seed_eigenvalue{};
    bool resolved = true;

    bool increasing() const noexcept { return count_after > count_before; }
};

struct CriticalSearchOptions {
    double scan_step = 1e-3;
    double refine_tol = 1e-6;
    std::optional<double> tol_im;  // default: per-sector default_tol_im
    std::optional<std::size_t> workers;
    std::size_t max_events = 0;               // 0 = no limit
    std::size_t max_events_per_bracket = 64;  // beyond this the rest of a bracket is reported unresolved
    EigenOptions eigen;
};

/// Complex count of the union over a momentum subset, as a function of g.
class ComplexCounter {
public:
    ComplexCounter(long L, long q, std::vector<long> momenta, std::optional<double> tol_im, EigenOptions eigen)
        : L_(L), q_(q), momenta_(std::move(momenta)), tol_im_(tol_im), eigen_(eigen) {
        if (momenta_.empty()) throw std::invalid_argument("complex counter: empty momentum subset");
    }

    std::size_t operator()(double g) const {
        std::size_t total = 0;
        for (long p : momenta_) total += count_sector(p, g);
        return total;
    }

    /// The union spectrum at g, with source_spec set to the first sector.
    Spectrum union_spectrum(double g) const {
        std::vector<Spectrum> parts;
        parts.reserve(momenta_.size());
        for (long p : momenta_) parts.push_back(spectrum_for(harper_spec(L_, q_, p, g), eigen_));
        return union_of(parts);
    }

    double tol_for(long p, double g) const { return tol_im_.value_or(default_tol_im(harper_spec(L_, q_, p, g))); }

    const std::vector<long>& momenta() const noexcept { return momenta_; }

private:
    std::size_t count_sector(long p, double g) const {
        const auto spec = harper_spec(L_, q_, p, g);
        const auto h = build_harper_matrix(spec);
        const double tol = tol_im_.value_or(default_tol_im(h));
        return complex_count(eigenvalues(h, eigen_), tol);
    }

    long L_;
    long q_;
    std::vector<long> momenta_;
    std::optional<double> tol_im_;
    EigenOptions eigen_;
};

namespace detail {

/// Complex eigenvalue with the smallest positive imaginary part, preferring
/// the larger real part on ties.
inline complex_t newest_complex(const Spectrum& s, double tol_im) {
    complex_t best{};
    bool found = false;
    for (const auto& z : s.eigenvalues) {
        if (!(z.imag() > tol_im)) continue;
        if (!found || z.imag() < best.imag() || (z.imag() == best.imag() && z.real() > best.real())) {
            best = z;
            found = true;
        }
    }
    return best;
}

inline std::vector<BifurcationEvent> resolve_bracket(const ComplexCounter& count, double a, double b,
                                                     std::size_t ca, std::size_t cb, double refine_tol,
                                                     std::size_t cap) {
    std::vector<BifurcationEvent> events;
    double lo = a;
    std::size_t clo = ca;
    while (true) {
        if (events.size() >= cap) {
            BifurcationEvent rest;
            rest.g_lo = lo;
            rest.g_hi = b;
            rest.g_critical = 0.5 * (lo + b);
            rest.count_before = clo;
            rest.count_after = cb;
            rest.resolved = false;
            events.push_back(rest);
            break;
        }
        // Leftmost departure from clo inside [lo, b].
        double l = lo;
        double h = b;
        std::size_t ch = cb;
        while (h - l > refine_tol) {
            const double m = 0.5 * (l + h);
            if (m <= l || m >= h) break;
            const std::size_t cm = count(m);
            if (cm == clo) {
                l = m;
            } else {
                h = m;
                ch = cm;
            }
        }
        BifurcationEvent e;
        e.g_lo = l;
        e.g_hi = h;
        e.g_critical = 0.5 * (l + h);
        e.count_before = clo;
        e.count_after = ch;
        events.push_back(e);
        if (ch == cb) break;
        lo = h;
        clo = ch;
    }
    return events;
}

}  // namespace detail

/// Scans the union complex count on [g_min, g_max] with the given step and
/// refines every change by bisection until the bracket is narrower than
/// refine_tol. Several transitions inside one scan interval are peeled off
/// left to right. Events are returned in ascending g_critical order.
inline std::vector<BifurcationEvent> find_critical_g(long L, long q, std::vector<long> momenta, double g_min,
                                                     double g_max, const CriticalSearchOptions& opt = {}) {
    if (!(g_min < g_max)) throw std::invalid_argument("find_critical_g: need g_min < g_max");
    if (!(opt.scan_step > 0.0)) throw std::invalid_argument("find_critical_g: scan_step must be positive");
    if (!(opt.refine_tol >= 1e-10)) throw std::invalid_argument("find_critical_g: refine_tol must be >= 1e-10");
    if (momenta.empty()) momenta = distinct_momentum_sectors(L, q);
    for (long p : momenta) validate(harper_spec(L, q, p, g_min));
    validate(harper_spec(L, q, momenta.front(), g_max));

    const ComplexCounter count(L, q, momenta, opt.tol_im, opt.eigen);
    std::vector<double> grid = make_grid(g_min, g_max, opt.scan_step);
    if (grid.back() > g_max) grid.back() = g_max;
    if (grid.back() < g_max) grid.push_back(g_max);

    const std::size_t workers = resolve_workers(opt.workers);
    std::vector<std::size_t> counts(grid.size());
    std::vector<std::size_t> brackets;
    // With an event limit the scan advances in chunks and stops once enough
    // brackets are known; otherwise the whole grid is evaluated at once.
    const std::size_t chunk = opt.max_events > 0 ? std::max<std::size_t>(16, 4 * workers) : grid.size();
    std::size_t scanned = 0;
    while (scanned < grid.size()) {
        const std::size_t end = std::min(grid.size(), scanned + chunk);
        parallel_for(end - scanned, workers, [&](std::size_t i) { counts[scanned + i] = count(grid[scanned + i]); });
        for (std::size_t i = (scanned == 0 ? 0 : scanned - 1); i + 1 < end; ++i)
            if (counts[i] != counts[i + 1]) brackets.push_back(i);
        scanned = end;
        if (opt.max_events > 0 && brackets.size() >= opt.max_events) break;
    }

    const std::size_t cap = opt.max_events > 0 ? std::min(opt.max_events, opt.max_events_per_bracket)
                                               : opt.max_events_per_bracket;
    std::vector<std::vector<BifurcationEvent>> found(brackets.size());
    const auto resolve = [&](std::size_t b) {
        const std::size_t i = brackets[b];
        found[b] = detail::resolve_bracket(count, grid[i], grid[i + 1], counts[i], counts[i + 1], opt.refine_tol,
                                           std::max<std::size_t>(cap, 1));
    };
    if (opt.max_events > 0) {
        // Left to right, stopping once enough events are known.
        std::size_t total = 0;
        for (std::size_t b = 0; b < brackets.size() && total < opt.max_events; ++b) {
            resolve(b);
            total += found[b].size();
        }
    } else {
        parallel_for(brackets.size(), workers, resolve);
    }

    std::vector<BifurcationEvent> events;
    for (auto& f : found) events.insert(events.end(), f.begin(), f.end());
    std::sort(events.begin(), events.end(),
              [](const auto& x, const auto& y) { return x.g_critical < y.g_critical; });
    if (opt.max_events > 0 && events.size() > opt.max_events) events.resize(opt.max_events);

    for (auto& e : events) {
        const double side = e.count_after >= e.count_before ? e.g_hi : e.g_lo;
        const Spectrum u = count.union_spectrum(side);
        e.seed_eigenvalue = detail::newest_complex(u, count.tol_for(momenta.front(), side));
    }
    return events;
}

struct PitchforkTrace {
    std::vector<double> g_grid;
    std::array<std::vector<complex_t>, 4> tracks;  // tracks 0-1 from sector p, 2-3 from p + L/2
    std::optional<double> g_critical;
    double tol_im = 0.0;
};

/// Which quartet to follow. Without a reference energy the newest complex
/// pair of sector p at the top of the grid is used (or, if that sector is
/// still real there, the closest pair of real eigenvalues with Re >= 0).
struct QuartetSelector {
    std::optional<complex_t> reference;
};

namespace detail {

inline std::array<std::size_t, 2> nearest_two(const std::vector<complex_t>& values, complex_t target) {
    std::array<std::size_t, 2> idx{values.size(), values.size()};
    std::array<double, 2> dist{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = std::abs(values[i] - target);
        if (d < dist[0]) {
            dist[1] = dist[0];
            idx[1] = idx[0];
            dist[0] = d;
            idx[0] = i;
        } else if (d < dist[1]) {
            dist[1] = d;
            idx[1] = i;
        }
    }
    return idx;
}

/// Nearest unused value for each target, greedily.
inline std::vector<complex_t> claim_nearest(const std::vector<complex_t>& values,
                                            std::span<const complex_t> targets) {
    std::vector<bool> used(values.size(), false);
    std::vector<complex_t> out;
    for (const auto& t : targets) {
        std::size_t best = values.size();
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (used[i]) continue;
            const double d = std::abs(values[i] - t);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        used[best] = true;
        out.push_back(values[best]);
    }
    return out;
}

struct Assignment {
    std::array<complex_t, 4> next;
    bool ambiguous = false;
};

/// Minimal total-distance assignment of 4 candidates to 4 previous values.
inline Assignment assign_tracks(const std::array<complex_t, 4>& prev, std::vector<complex_t> cand) {
    std::array<std::size_t, 4> perm{0, 1, 2, 3};
    double best = std::numeric_limits<double>::infinity();
    double second = std::numeric_limits<double>::infinity();
    std::array<std::size_t, 4> best_perm = perm;
    do {
        double cost = 0.0;
        for (std::size_t t = 0; t < 4; ++t) cost += std::abs(prev[t] - cand[perm[t]]);
        if (cost < best) {
            second = best;
            best = cost;
            best_perm = perm;
        } else if (cost < second) {
            second = cost;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    Assignment a;
    for (std::size_t t = 0; t < 4; ++t) a.next[t] = cand[best_perm[t]];
    // Swapping two identical candidates is not a real ambiguity.
    bool distinct = true;
    for (std::size_t i = 0; i < 4 && distinct; ++i)
        for (std::size_t j = i + 1; j < 4; ++j)
            if (cand[i] == cand[j]) distinct = false;
    a.ambiguous = distinct && (second - best) <= 1e-12;
    return a;
}

}  // namespace detail

/// Follows the quartet {E, E*, -E, -E*} born at one double pitchfork across
/// an ascending g grid. Sector p supplies the pair near the reference and
/// sector p + L/2 the pair near its negative (L must be even). Tracks are
/// matched by continuity from the top of the grid downward; when two
/// assignments cost the same to within 1e-12 a midpoint is inserted, at most
/// three times per interval.
inline PitchforkTrace pitchfork_trace(long L, long q, long p, std::vector<double> g_grid,
                                      const QuartetSelector& selector = {},
                                      std::optional<double> g_critical = std::nullopt,
                                      const EigenOptions& eigen = {}) {
    if (L % 2 != 0) throw std::invalid_argument("pitchfork_trace: L must be even so that p + L/2 is a sector");
    if (g_grid.size() < 2) throw std::invalid_argument("pitchfork_trace: grid needs at least two points");
    for (std::size_t i = 1; i < g_grid.size(); ++i)
        if (!(g_grid[i] > g_grid[i - 1])) throw std::invalid_argument("pitchfork_trace: grid must be ascending");
    const long p_partner = (p + L / 2) % L;

    const auto sector = [&](long pp, double g) { return spectrum_for(harper_spec(L, q, pp, g), eigen).eigenvalues; };

    PitchforkTrace trace;
    trace.g_critical = g_critical;
    trace.tol_im = default_tol_im(harper_spec(L, q, p, g_grid.back()));

    const auto top_a = sector(p, g_grid.back());
    const auto top_b = sector(p_partner, g_grid.back());
    complex_t reference{};
    if (selector.reference) {
        reference = *selector.reference;
    } else {
        const Spectrum top = make_spectrum(top_a);
        if (complex_count(top, trace.tol_im) > 0) {
            reference = detail::newest_complex(top, trace.tol_im);
        } else {
            double gap = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i + 1 < top.size(); ++i) {
                const double x = top.eigenvalues[i].real();
                const double y = top.eigenvalues[i + 1].real();
                if (x < 0.0 || y - x >= gap) continue;
                gap = y - x;
                reference = {0.5 * (x + y), 0.0};
            }
        }
    }

    std::array<complex_t, 4> current{};
    {
        const auto ia = detail::nearest_two(top_a, reference);
        const auto ib = detail::nearest_two(top_b, -reference);
        std::array<complex_t, 2> a{top_a[ia[0]], top_a[ia[1]]};
        std::array<complex_t, 2> b{top_b[ib[0]], top_b[ib[1]]};
        std::sort(a.begin(), a.end(), canonical_less);
        std::sort(b.begin(), b.end(), canonical_less);
        current = {a[0], a[1], b[0], b[1]};
    }

    // Walk downward; collect (g, values) in descending order.
    std::vector<double> gs{g_grid.back()};
    std::vector<std::array<complex_t, 4>> vals{current};
    const auto candidates_at = [&](double g, const std::array<complex_t, 4>& prev) {
        const auto sa = sector(p, g);
        const auto sb = sector(p_partner, g);
        auto ca = detail::claim_nearest(sa, std::span<const complex_t>(prev.data(), 2));
        const auto cb = detail::claim_nearest(sb, std::span<const complex_t>(prev.data() + 2, 2));
        ca.insert(ca.end(), cb.begin(), cb.end());
        return ca;
    };

    for (std::size_t k = g_grid.size() - 1; k-- > 0;) {
        double upper = gs.back();
        const double target = g_grid[k];
        // Up to three midpoint insertions when the match is ambiguous.
        std::vector<double> pending{target};
        int refinements = 0;
        while (!pending.empty()) {
            const double g = pending.back();
            const auto a = detail::assign_tracks(vals.back(), candidates_at(g, vals.back()));
            if (a.ambiguous && refinements < 3) {
                ++refinements;
                pending.push_back(0.5 * (upper + g));
                continue;
            }
            pending.pop_back();
            gs.push_back(g);
            vals.push_back(a.next);
            upper = g;
        }
    }

    trace.g_grid.assign(gs.rbegin(), gs.rend());
    for (std::size_t t = 0; t < 4; ++t) {
        trace.tracks[t].reserve(vals.size());
        for (auto it = vals.rbegin(); it != vals.rend(); ++it) trace.tracks[t].push_back((*it)[t]);
    }
    if (!trace.g_critical) {
        for (std::size_t i = 0; i < trace.g_grid.size(); ++i) {
            bool complex = false;
            for (const auto& tr : trace.tracks) complex = complex || std::abs(tr[i].imag()) > trace.tol_im;
            if (complex) {
                trace.g_critical = i == 0 ? trace.g_grid[0] : 0.5 * (trace.g_grid[i - 1] + trace.g_grid[i]);
                break;
            }
        }
    }
    return trace;
}

/// Distance of the four values at grid point i from the closed set
/// {E, E*, -E, -E*} generated by track 0.
inline double quartet_closure_error(const PitchforkTrace& trace, std::size_t i) {
    const complex_t e = trace.tracks[0][i];
    const std::array<complex_t, 4> ideal{e, std::conj(e), -e, -std::conj(e)};
    std::array<complex_t, 4> actual{};
    for (std::size_t t = 0; t < 4; ++t) actual[t] = trace.tracks[t][i];
    return match_multisets(actual, ideal).max_distance;
}

struct EigenGroup {
    enum class Kind { Quartet, ImaginaryPair };
    Kind kind = Kind::Quartet;
    std::vector<complex_t> members;
};

struct QuartetGrouping {
    std::vector<EigenGroup> groups;
    std::vector<complex_t> defects;  // complex eigenvalues left without full partners

    std::size_t quartet_count() const {
        return static_cast<std::size_t>(std::count_if(groups.begin(), groups.end(), [](const auto& g) {
            return g.kind == EigenGroup::Kind::Quartet;
        }));
    }
};

/// Partitions the complex eigenvalues (|Im| > tol) of a union spectrum into
/// groups closed under conjugation and negation. A value on the imaginary
/// axis closes with its conjugate alone. Requires even L when the spectrum
/// records its source spec, since the negation partner lives at k + pi.
inline QuartetGrouping quartet_grouping(const Spectrum& union_spectrum, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("quartet_grouping: tol must be positive");
    if (union_spectrum.source_spec && union_spectrum.source_spec->L % 2 != 0)
        throw std::invalid_argument("quartet_grouping: odd L has no k + pi sector; negation partners are not on the grid");

    std::vector<complex_t> cx;
    for (const auto& z : union_spectrum.eigenvalues)
        if (std::abs(z.imag()) > tol) cx.push_back(z);
    std::vector<bool> used(cx.size(), false);

    const auto claim = [&](complex_t target, std::size_t self) -> std::optional<std::size_t> {
        std::size_t best = cx.size();
        double best_d = tol;
        for (std::size_t j = 0; j < cx.size(); ++j) {
            if (j == self || used[j]) continue;
            const double d = std::abs(cx[j] - target);
            if (d <= best_d) {
                best_d = d;
                best = j;
            }
        }
        if (best == cx.size()) return std::nullopt;
        return best;
    };

    QuartetGrouping out;
    for (std::size_t i = 0; i < cx.size(); ++i) {
        if (used[i]) continue;
        const complex_t z = cx[i];
        used[i] = true;
        if (std::abs(z.real()) <= tol) {
            if (const auto c = claim(std::conj(z), i)) {
                used[*c] = true;
                out.groups.push_back({EigenGroup::Kind::ImaginaryPair, {z, cx[*c]}});
            } else {
                out.defects.push_back(z);
            }
            continue;
        }
        std::vector<std::size_t> taken;
        bool complete = true;
        for (const complex_t target : {std::conj(z), -z, -std::conj(z)}) {
            const auto c = claim(target, i);
            if (!c) {
                complete = false;
                break;
            }
            used[*c] = true;
            taken.push_back(*c);
        }
        if (complete) {
            EigenGroup g{EigenGroup::Kind::Quartet, {z}};
            for (auto t : taken) g.members.push_back(cx[t]);
            std::sort(g.members.begin(), g.members.end(), canonical_less);
            out.groups.push_back(std::move(g));
        } else {
            for (auto t : taken) used[t] = false;
            out.defects.push_back(z);
        }
    }
    return out;
}

}  // namespace cocoonlab
