#pragma once

// Brute-force eigenvalue oracle for small matrices: characteristic polynomial
// by the Faddeev-LeVerrier recurrence, roots by Aberth-Ehrlich simultaneous
// iteration. Shares no numerical code with eigenvalues().

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "cocoonlab/errors.hpp"
#include "cocoonlab/matrix.hpp"
#include "cocoonlab/operator.hpp"
#include "cocoonlab/spectrum.hpp"

namespace cocoonlab {

inline constexpr std::size_t max_oracle_dimension = 10;

namespace detail {

// Quad precision keeps multiple roots (which Aberth only resolves to about
// sqrt(eps)) well inside the 1e-8 comparison tolerance.
using wide = __float128;

struct wide_complex {
    wide re = 0;
    wide im = 0;

    friend wide_complex operator+(wide_complex a, wide_complex b) { return {a.re + b.re, a.im + b.im}; }
    friend wide_complex operator-(wide_complex a, wide_complex b) { return {a.re - b.re, a.im - b.im}; }
    friend wide_complex operator*(wide_complex a, wide_complex b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend wide_complex operator/(wide_complex a, wide_complex b) {
        const wide d = b.re * b.re + b.im * b.im;
        return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
    }
};

inline wide abs2(wide_complex z) { return z.re * z.re + z.im * z.im; }
inline wide wabs(wide x) { return x < 0 ? -x : x; }
// Moduli only feed stopping tests, so a double square root is precise enough.
inline wide modulus(wide_complex z) { return std::sqrt(static_cast<double>(abs2(z))); }

/// Monic characteristic polynomial det(zI - A); coefficient k multiplies z^k.
inline std::vector<wide> faddeev_leverrier(const DenseRealMatrix& a) {
    const std::size_t n = a.size();
    std::vector<wide> c(n + 1, 0);
    c[n] = 1;
    // M_k = A M_{k-1} + c_{n-k+1} I, c_{n-k} = -tr(A M_k) / k
    std::vector<wide> m(n * n, 0);
    std::vector<wide> am(n * n, 0);
    for (std::size_t k = 1; k <= n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                wide s = 0;
                for (std::size_t l = 0; l < n; ++l) s += static_cast<wide>(a(i, l)) * m[l * n + j];
                am[i * n + j] = s;
            }
        }
        for (std::size_t i = 0; i < n; ++i) am[i * n + i] += c[n - k + 1];
        m.swap(am);
        wide trace = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t l = 0; l < n; ++l) trace += static_cast<wide>(a(i, l)) * m[l * n + i];
        c[n - k] = -trace / static_cast<wide>(k);
    }
    return c;
}

struct PolyEval {
    wide_complex value;
    wide_complex derivative;
    wide magnitude_bound;  // sum |c_k| |z|^k, for the rounding-level stop test
};

inline PolyEval horner(const std::vector<wide>& c, wide_complex z) {
    wide_complex p{c.back(), 0};
    wide_complex dp{};
    wide bound = wabs(c.back());
    const wide az = modulus(z);
    for (std::size_t k = c.size() - 1; k-- > 0;) {
        dp = dp * z + p;
        p = p * z + wide_complex{c[k], 0};
        bound = bound * az + wabs(c[k]);
    }
    return {p, dp, bound};
}

/// Aberth-Ehrlich iteration from a perturbed circle; returns false when the
/// iteration cap is hit before every root meets the stopping test.
inline bool aberth_roots(const std::vector<wide>& c, std::uint64_t seed, std::vector<wide_complex>& z) {
    const std::size_t n = c.size() - 1;
    // Fujiwara bound on root moduli.
    double radius = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double term = std::pow(std::abs(static_cast<double>(c[k])), 1.0 / static_cast<double>(n - k));
        radius = std::max(radius, term);
    }
    radius = std::max(2.0 * radius, 1.0);
    z.assign(n, {});
    for (std::size_t i = 0; i < n; ++i) {
        const double jitter = unit_uniform(seed, i) - 0.5;
        const double angle =
            two_pi * (static_cast<double>(i) + 0.25 + 0.3 * jitter) / static_cast<double>(n);
        const double r = radius * (1.0 + 0.05 * jitter);
        z[i] = {r * std::cos(angle), r * std::sin(angle)};
    }

    const wide eps = static_cast<wide>(0x1p-112);
    std::vector<bool> done(n, false);
    for (int iter = 0; iter < 1000; ++iter) {
        bool all_done = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (done[i]) continue;
            const auto ev = horner(c, z[i]);
            if (modulus(ev.value) <= 8 * static_cast<wide>(n) * eps * ev.magnitude_bound) {
                done[i] = true;
                continue;
            }
            all_done = false;
            const wide_complex ratio = ev.value / ev.derivative;
            wide_complex repulsion{};
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) repulsion = repulsion + wide_complex{1, 0} / (z[i] - z[j]);
            const wide_complex step = ratio / (wide_complex{1, 0} - ratio * repulsion);
            z[i] = z[i] - step;
            const wide zmod = modulus(z[i]);
            if (modulus(step) <= eps * (zmod > 1 ? zmod : wide{1})) done[i] = true;
        }
        if (all_done) return true;
    }
    return false;
}

}  // namespace detail

/// Eigenvalues of a matrix of dimension <= 10 as roots of its characteristic
/// polynomial. Retries once from a different perturbation before failing.
inline Spectrum charpoly_roots_oracle(const DenseRealMatrix& a) {
    const std::size_t n = a.size();
    if (n == 0 || n > max_oracle_dimension)
        throw std::invalid_argument("charpoly oracle: dimension must lie in [1, 10]");
    if (!all_finite(a)) throw std::invalid_argument("charpoly oracle: non-finite entry");

    const auto coeffs = detail::faddeev_leverrier(a);
    std::vector<detail::wide_complex> roots;
    bool ok = false;
    for (std::uint64_t attempt = 0; attempt < 2 && !ok; ++attempt)
        ok = detail::aberth_roots(coeffs, 0xabe77 + attempt, roots);
    if (!ok) throw numerical_error("charpoly oracle: Aberth iteration did not converge");

    std::vector<complex_t> values;
    values.reserve(n);
    for (const auto& r : roots)
        values.emplace_back(static_cast<double>(r.re), static_cast<double>(r.im));
    return make_spectrum(std::move(values));
}

}  // namespace cocoonlab
