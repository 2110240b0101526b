#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cocoonlab/matrix.hpp"
#include "cocoonlab/operator.hpp"

namespace cocoonlab {

/// Multiset of eigenvalues in canonical order (real part ascending, then
/// imaginary part ascending) with conjugate-partner bookkeeping.
struct Spectrum {
    std::vector<complex_t> eigenvalues;
    std::vector<std::pair<std::size_t, std::size_t>> pairing;  // (Im < 0, Im > 0)
    double max_residual = 0.0;
    std::optional<OperatorSpec> source_spec;

    std::size_t size() const noexcept { return eigenvalues.size(); }
};

struct EigenPair {
    complex_t value;
    std::vector<complex_t> vector;
    double residual = 0.0;
};

inline bool canonical_less(const complex_t& a, const complex_t& b) noexcept {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

inline double default_pairing_tolerance(std::span<const complex_t> values) {
    double scale = 1.0;
    for (const auto& z : values) scale = std::max(scale, std::abs(z));
    return 1e-9 * scale;
}

/// Sorts into canonical order and recomputes the conjugate pairing. An
/// eigenvalue with |Im| > tol is paired with the nearest unpaired value
/// whose conjugate lies within tol; unmatched ones are left unpaired.
inline void canonicalize(Spectrum& s, std::optional<double> pairing_tol = std::nullopt) {
    std::sort(s.eigenvalues.begin(), s.eigenvalues.end(), canonical_less);
    const double tol = pairing_tol.value_or(default_pairing_tolerance(s.eigenvalues));
    s.pairing.clear();
    const auto& ev = s.eigenvalues;
    std::vector<bool> used(ev.size(), false);
    for (std::size_t i = 0; i < ev.size(); ++i) {
        if (used[i] || !(ev[i].imag() < -tol)) continue;
        std::size_t best = ev.size();
        double best_d = tol;
        for (std::size_t j = 0; j < ev.size(); ++j) {
            if (j == i || used[j] || !(ev[j].imag() > tol)) continue;
            const double d = std::abs(ev[j] - std::conj(ev[i]));
            if (d <= best_d) {
                best_d = d;
                best = j;
            }
        }
        if (best != ev.size()) {
            used[i] = used[best] = true;
            s.pairing.emplace_back(i, best);
        }
    }
}

inline Spectrum make_spectrum(std::vector<complex_t> values, double max_residual = 0.0,
                              std::optional<OperatorSpec> source = std::nullopt) {
    Spectrum s;
    s.eigenvalues = std::move(values);
    s.max_residual = max_residual;
    s.source_spec = std::move(source);
    canonicalize(s);
    return s;
}

/// Result of matching two eigenvalue multisets.
struct MatchResult {
    double max_distance = 0.0;
    complex_t worst_a{};
    complex_t worst_b{};
    bool size_mismatch = false;
};

/// Greedy nearest-neighbour matching: each value of `a`, in canonical
/// order, claims the closest unclaimed value of `b`.
inline MatchResult match_multisets(std::span<const complex_t> a, std::span<const complex_t> b) {
    MatchResult res;
    if (a.size() != b.size()) {
        res.size_mismatch = true;
        res.max_distance = std::numeric_limits<double>::infinity();
        return res;
    }
    std::vector<complex_t> sa(a.begin(), a.end());
    std::sort(sa.begin(), sa.end(), canonical_less);
    std::vector<bool> used(b.size(), false);
    for (const auto& z : sa) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (used[j]) continue;
            const double d = std::abs(z - b[j]);
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        used[best] = true;
        if (best_d >= res.max_distance) {
            res.max_distance = best_d;
            res.worst_a = z;
            res.worst_b = b[best];
        }
    }
    return res;
}

inline double max_abs_imag(std::span<const complex_t> values) {
    double m = 0.0;
    for (const auto& z : values) m = std::max(m, std::abs(z.imag()));
    return m;
}

/// Concatenates spectra and re-canonicalises; the first source spec is kept.
inline Spectrum union_of(std::span<const Spectrum> parts) {
    Spectrum u;
    double r = 0.0;
    for (const auto& s : parts) {
        u.eigenvalues.insert(u.eigenvalues.end(), s.eigenvalues.begin(), s.eigenvalues.end());
        r = std::max(r, s.max_residual);
        if (!u.source_spec && s.source_spec) u.source_spec = s.source_spec;
    }
    u.max_residual = r;
    canonicalize(u);
    return u;
}

}  // namespace cocoonlab
