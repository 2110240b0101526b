#pragma once

// Checks of the spectral symmetries of the non-Hermitian Harper operator and
// eigenvector diagnostics for conjugation-symmetry breaking and localization.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cocoonlab/eigensolver.hpp"
#include "cocoonlab/operator.hpp"
#include "cocoonlab/spectrum.hpp"
#include "cocoonlab/sweep.hpp"

namespace cocoonlab {

inline constexpr double symmetry_tol = 1e-8;

struct SymmetryReport {
    std::string name;
    OperatorSpec point;
    double max_distance = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    complex_t witness_a{};
    complex_t witness_b{};
    // Only the energy-negation check maps an explicit eigenvector.
    std::optional<double> vector_residual;
    std::optional<double> vector_tolerance;
    std::string note;
};

namespace detail {

inline SymmetryReport spectral_report(std::string name, const OperatorSpec& point, const MatchResult& m,
                                      double tol) {
    SymmetryReport r;
    r.name = std::move(name);
    r.point = point;
    r.max_distance = m.max_distance;
    r.tolerance = tol;
    r.pass = !m.size_mismatch && m.max_distance <= tol;
    r.witness_a = m.worst_a;
    r.witness_b = m.worst_b;
    return r;
}

inline long wrap(long v, long L) { return ((v % L) + L) % L; }

/// Index of the first eigenvalue (canonical order) farther than `gap` from
/// every other one; falls back to 0 when all are clustered.
inline std::size_t first_simple(const std::vector<complex_t>& values, double gap) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        bool simple = true;
        for (std::size_t j = 0; j < values.size() && simple; ++j)
            if (j != i && std::abs(values[i] - values[j]) <= gap) simple = false;
        if (simple) return i;
    }
    return 0;
}

}  // namespace detail

/// Matrices at flux numerators q and q + L must agree entry for entry.
inline SymmetryReport verify_flux_periodicity(long L, long q, long p, double g,
                                              Boundary boundary = Boundary::Periodic) {
    const auto a = harper_spec(L, q, p, g, boundary);
    const auto b = harper_spec(L, q + L, p, g, boundary);
    const auto ha = build_harper_matrix(a);
    const auto hb = build_harper_matrix(b);
    SymmetryReport r;
    r.name = "flux_periodicity";
    r.point = a;
    r.tolerance = 0.0;
    for (std::size_t i = 0; i < ha.entries().size(); ++i) {
        const double d = std::abs(ha.entries()[i] - hb.entries()[i]);
        if (d >= r.max_distance) {
            r.max_distance = d;
            r.witness_a = ha.entries()[i];
            r.witness_b = hb.entries()[i];
        }
    }
    r.pass = (ha == hb);
    return r;
}

/// spectrum(q, p) = -spectrum(q, p + L/2), plus the explicit map
/// xi_m -> (-1)^m xi_m applied to one eigenvector. Even L only.
inline SymmetryReport verify_energy_negation(long L, long q, long p, double g) {
    if (L % 2 != 0)
        throw std::invalid_argument("energy negation: L must be even (k + pi is not on the momentum grid for odd L)");
    const auto a = harper_spec(L, q, p, g);
    const auto b = harper_spec(L, q, detail::wrap(p + L / 2, L), g);
    const auto ha = build_harper_matrix(a);
    const auto hb = build_harper_matrix(b);
    const Spectrum sa = eigenvalues(ha);
    std::vector<complex_t> neg_b = eigenvalues(hb).eigenvalues;
    for (auto& z : neg_b) z = -z;
    auto r = detail::spectral_report("energy_negation", a, match_multisets(sa.eigenvalues, neg_b), symmetry_tol);

    const double scale = frobenius_norm(ha);
    const std::size_t idx = detail::first_simple(sa.eigenvalues, 1e-6 * scale);
    const EigenPair pair = eigenpair(ha, sa.eigenvalues[idx]);
    std::vector<complex_t> mapped = pair.vector;
    for (std::size_t m = 1; m < mapped.size(); m += 2) mapped[m] = -mapped[m];
    auto hv = multiply(hb, mapped);
    for (std::size_t m = 0; m < hv.size(); ++m) hv[m] += pair.value * mapped[m];
    r.vector_residual = norm2(hv);
    r.vector_tolerance = symmetry_tol * scale;
    r.pass = r.pass && *r.vector_residual <= *r.vector_tolerance;
    return r;
}

/// spectrum(q, p) = spectrum(L - q, L - p).
inline SymmetryReport verify_flux_reflection(long L, long q, long p, double g) {
    const auto a = harper_spec(L, q, p, g);
    const auto b = harper_spec(L, detail::wrap(L - q, L), detail::wrap(L - p, L), g);
    return detail::spectral_report("flux_reflection", a,
                                   match_multisets(spectrum_for(a).eigenvalues, spectrum_for(b).eigenvalues),
                                   symmetry_tol);
}

/// spectrum(g) = spectrum(-g); the transpose maps one operator to the other.
inline SymmetryReport verify_g_reflection(long L, long q, long p, double g) {
    const auto a = harper_spec(L, q, p, g);
    const auto b = harper_spec(L, q, p, -g);
    return detail::spectral_report("g_reflection", a,
                                   match_multisets(spectrum_for(a).eigenvalues, spectrum_for(b).eigenvalues),
                                   symmetry_tol);
}

/// The multiset equals its own conjugate.
inline SymmetryReport verify_conjugation_closure(const Spectrum& spectrum) {
    std::vector<complex_t> conj(spectrum.eigenvalues);
    for (auto& z : conj) z = std::conj(z);
    auto r = detail::spectral_report("conjugation_closure", spectrum.source_spec.value_or(OperatorSpec{}),
                                     match_multisets(spectrum.eigenvalues, conj), symmetry_tol);
    return r;
}

/// Tolerance for the open-chain comparison: 1e-8 while |g| <= 1 or L <= 100,
/// then widened by a factor |g| L / 100 because e^{g L} conditioning makes
/// the match progressively harder to resolve.
inline double open_bc_tolerance(long L, double g) {
    if (std::abs(g) <= 1.0 || L <= 100) return symmetry_tol;
    return symmetry_tol * std::abs(g) * static_cast<double>(L) / 100.0;
}

/// On an open chain the gauge xi_m = e^{-g m} eta_m removes g, so the
/// spectrum is real and equal to the g = 0 spectrum.
inline SymmetryReport verify_open_bc_reality(long L, long q, long p, double g) {
    const auto a = harper_spec(L, q, p, g, Boundary::Open);
    const auto b = harper_spec(L, q, p, 0.0, Boundary::Open);
    const Spectrum sa = spectrum_for(a);
    const double tol = open_bc_tolerance(L, g);
    auto r = detail::spectral_report("open_bc_reality", a, match_multisets(sa.eigenvalues, spectrum_for(b).eigenvalues),
                                     tol);
    const double im = max_abs_imag(sa.eigenvalues);
    r.pass = r.pass && im <= 1e-9;
    if (tol > symmetry_tol) r.note = "warning: |g| > 1 and L > 100, tolerance widened to " + std::to_string(tol);
    if (im > 1e-9) r.note += (r.note.empty() ? "" : "; ") + std::string("imaginary parts exceed 1e-9");
    return r;
}

namespace detail {

inline void require_unit(std::span<const complex_t> v, const char* who) {
    if (v.empty()) throw std::invalid_argument(std::string(who) + ": empty vector");
    if (std::abs(norm2(v) - 1.0) > 1e-12) throw std::invalid_argument(std::string(who) + ": vector must have unit norm");
}

}  // namespace detail

/// 1 / sum |xi_m|^4, between 1 (one site) and L (uniform).
inline double participation_ratio(std::span<const complex_t> v) {
    detail::require_unit(v, "participation_ratio");
    double s = 0.0;
    for (const auto& x : v) {
        const double w = std::norm(x);
        s += w * w;
    }
    return 1.0 / s;
}

/// eta = 1 - |sum xi_m^2|. Zero exactly when the vector is a global phase
/// times a real vector; one for (1, i) / sqrt(2).
inline double conjugation_order_parameter(std::span<const complex_t> v) {
    detail::require_unit(v, "conjugation_order_parameter");
    complex_t s{};
    for (const auto& x : v) s += x * x;
    return std::max(0.0, 1.0 - std::abs(s));
}

/// The five spectral checks that apply at one periodic parameter point;
/// energy negation is skipped for odd L.
inline std::vector<SymmetryReport> symmetry_suite(long L, long q, long p, double g) {
    std::vector<SymmetryReport> out;
    out.push_back(verify_flux_periodicity(L, q, p, g));
    if (L % 2 == 0) out.push_back(verify_energy_negation(L, q, p, g));
    out.push_back(verify_flux_reflection(L, q, p, g));
    out.push_back(verify_g_reflection(L, q, p, g));
    out.push_back(verify_conjugation_closure(spectrum_for(harper_spec(L, q, p, g))));
    return out;
}

}  // namespace cocoonlab
