#pragma once

// Flux sweeps (butterfly / cocoon data) and g sweeps (transition fan data).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cocoonlab/eigensolver.hpp"
#include "cocoonlab/operator.hpp"
#include "cocoonlab/parallel.hpp"
#include "cocoonlab/spectrum.hpp"

namespace cocoonlab {

/// Spectrum of the Harper-family operator described by `spec`.
inline Spectrum spectrum_for(const OperatorSpec& spec, const EigenOptions& opt = {}) {
    Spectrum s = eigenvalues(build_harper_matrix(spec), opt);
    s.source_spec = spec;
    return s;
}

/// Default threshold for "this eigenvalue is complex": 1e-7 ||H||_F / sqrt(L).
inline double default_tol_im(const DenseRealMatrix& h) {
    return 1e-7 * frobenius_norm(h) / std::sqrt(static_cast<double>(h.size()));
}

inline double default_tol_im(const OperatorSpec& spec) { return default_tol_im(build_harper_matrix(spec)); }

inline std::vector<long> full_range(long L) {
    std::vector<long> v(static_cast<std::size_t>(L));
    std::iota(v.begin(), v.end(), 0L);
    return v;
}

/// One representative per class of momentum sectors that are related by a
/// lattice translation: p and p' give identical spectra when
/// p = p' (mod gcd(q, L)), so {0, ..., gcd(q, L) - 1} covers each class once.
inline std::vector<long> distinct_momentum_sectors(long L, long q) {
    const long d = std::gcd(FluxRational{q, L}.reduced(), L);
    return full_range(d == 0 ? L : d);
}

struct SweepPoint {
    long q = 0;
    long p = 0;
    std::size_t eigen_index = 0;
    double re = 0.0;
    double im = 0.0;
    bool operator==(const SweepPoint&) const = default;
};

struct CellStatus {
    long q = 0;
    long p = 0;
    double max_residual = 0.0;
    bool ok = true;
    std::string error;
};

struct SweepDataset {
    long L = 0;
    double g = 0.0;
    Boundary boundary = Boundary::Periodic;
    PotentialKind potential = HarperPotential{};
    std::vector<SweepPoint> points;  // lexicographic in (q, p, eigen_index)
    std::vector<CellStatus> cells;   // lexicographic in (q, p)

    bool complete() const {
        for (const auto& c : cells)
            if (!c.ok) return false;
        return true;
    }
};

struct SweepOptions {
    std::optional<std::size_t> workers;
    EigenOptions eigen;
};

namespace detail {

inline void check_subset(const std::vector<long>& subset, long L, const char* what) {
    if (subset.empty()) throw std::invalid_argument(std::string("sweep: empty ") + what + " subset");
    for (long v : subset)
        if (v < 0 || v >= L) throw std::invalid_argument(std::string("sweep: ") + what + " index out of range");
    std::vector<long> sorted(subset);
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument(std::string("sweep: duplicate ") + what + " index");
}

struct CellResult {
    std::vector<complex_t> values;
    CellStatus status;
};

inline CellResult solve_cell(const OperatorSpec& spec, const EigenOptions& opt) {
    CellResult r;
    r.status.q = spec.flux.q;
    r.status.p = spec.p;
    try {
        const Spectrum s = spectrum_for(spec, opt);
        r.values = s.eigenvalues;
        r.status.max_residual = s.max_residual;
    } catch (const std::exception& e) {
        r.status.ok = false;
        r.status.error = e.what();
    }
    return r;
}

}  // namespace detail

/// Spectra over a grid of flux numerators and momentum indices at fixed
/// (L, g). Empty subsets default to the full range 0..L-1. A failing cell is
/// recorded in `cells` and contributes no points.
inline SweepDataset flux_sweep(long L, double g, Boundary boundary, std::vector<long> fluxes = {},
                               std::vector<long> momenta = {}, PotentialKind potential = HarperPotential{},
                               const SweepOptions& opt = {}) {
    if (fluxes.empty()) fluxes = full_range(L);
    if (momenta.empty()) momenta = full_range(L);
    detail::check_subset(fluxes, L, "flux");
    detail::check_subset(momenta, L, "momentum");
    std::sort(fluxes.begin(), fluxes.end());
    std::sort(momenta.begin(), momenta.end());
    validate(harper_spec(L, fluxes.front(), momenta.front(), g, boundary, potential));

    const std::size_t cells = fluxes.size() * momenta.size();
    std::vector<detail::CellResult> results(cells);
    parallel_for(cells, resolve_workers(opt.workers), [&](std::size_t i) {
        const long q = fluxes[i / momenta.size()];
        const long p = momenta[i % momenta.size()];
        results[i] = detail::solve_cell(harper_spec(L, q, p, g, boundary, potential), opt.eigen);
    });

    SweepDataset d;
    d.L = L;
    d.g = g;
    d.boundary = boundary;
    d.potential = potential;
    d.points.reserve(cells * static_cast<std::size_t>(L));
    d.cells.reserve(cells);
    for (auto& r : results) {
        for (std::size_t k = 0; k < r.values.size(); ++k)
            d.points.push_back({r.status.q, r.status.p, k, r.values[k].real(), r.values[k].imag()});
        d.cells.push_back(std::move(r.status));
    }
    return d;
}

struct GSlice {
    double g = 0.0;
    std::vector<SweepPoint> points;  // union over the momentum subset
    std::size_t complex_count = 0;
    std::vector<CellStatus> cells;
};

struct GSweepDataset {
    long L = 0;
    long q = 0;
    std::vector<long> momenta;
    std::vector<GSlice> slices;  // one per g, ascending

    bool complete() const {
        for (const auto& s : slices)
            for (const auto& c : s.cells)
                if (!c.ok) return false;
        return true;
    }
};

/// Evenly spaced grid lo, lo + step, ..., up to hi (inclusive within
/// half a step). Each point is lo + i * step, never an accumulated sum.
inline std::vector<double> make_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi))
        throw std::invalid_argument("grid: need finite lo <= hi and step > 0");
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 0.5)) + 1;
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i) grid[i] = lo + static_cast<double>(i) * step;
    return grid;
}

struct GSweepOptions {
    std::optional<std::size_t> workers;
    EigenOptions eigen;
    std::optional<double> tol_im;  // default: per-sector default_tol_im
};

/// Union-over-momentum spectra along an ascending g grid, keeping every
/// imaginary part and the complex count of each slice.
inline GSweepDataset g_sweep(long L, long q, const std::vector<double>& g_grid, std::vector<long> momenta = {},
                             const GSweepOptions& opt = {}) {
    if (g_grid.size() < 2) throw std::invalid_argument("g sweep: grid needs at least two points");
    for (std::size_t i = 1; i < g_grid.size(); ++i)
        if (!(g_grid[i] > g_grid[i - 1])) throw std::invalid_argument("g sweep: grid must be strictly ascending");
    if (momenta.empty()) momenta = full_range(L);
    detail::check_subset(momenta, L, "momentum");
    std::sort(momenta.begin(), momenta.end());
    for (double g : g_grid) validate(harper_spec(L, q, momenta.front(), g));

    const std::size_t cells = g_grid.size() * momenta.size();
    std::vector<detail::CellResult> results(cells);
    std::vector<std::size_t> counts(cells, 0);
    parallel_for(cells, resolve_workers(opt.workers), [&](std::size_t i) {
        const auto spec = harper_spec(L, q, momenta[i % momenta.size()], g_grid[i / momenta.size()]);
        results[i] = detail::solve_cell(spec, opt.eigen);
        const double tol = opt.tol_im.value_or(default_tol_im(spec));
        for (const auto& z : results[i].values)
            if (std::abs(z.imag()) > tol) ++counts[i];
    });

    GSweepDataset d;
    d.L = L;
    d.q = q;
    d.momenta = momenta;
    d.slices.resize(g_grid.size());
    for (std::size_t gi = 0; gi < g_grid.size(); ++gi) {
        auto& slice = d.slices[gi];
        slice.g = g_grid[gi];
        for (std::size_t pi = 0; pi < momenta.size(); ++pi) {
            const std::size_t i = gi * momenta.size() + pi;
            auto& r = results[i];
            for (std::size_t k = 0; k < r.values.size(); ++k)
                slice.points.push_back({q, r.status.p, k, r.values[k].real(), r.values[k].imag()});
            slice.complex_count += counts[i];
            slice.cells.push_back(std::move(r.status));
        }
    }
    return d;
}

}  // namespace cocoonlab
