#pragma once

// Dense builders for the non-Hermitian Harper operator on a ring or open
// chain, and for its two-dimensional magnetic-lattice parent.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>

#include "cocoonlab/matrix.hpp"

namespace cocoonlab {

inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double max_abs_g = 20.0;

/// Flux per plaquette phi = q / L, restricted to integer phi * L.
struct FluxRational {
    long q = 0;
    long L = 3;

    /// Numerator reduced into [0, L).
    long reduced() const noexcept { return ((q % L) + L) % L; }
    double phi() const noexcept { return static_cast<double>(reduced()) / static_cast<double>(L); }
    bool operator==(const FluxRational&) const = default;
};

enum class Boundary { Periodic, Open };

struct HarperPotential {
    bool operator==(const HarperPotential&) const = default;
};
struct ConstantPotential {
    double c = 0.0;
    bool operator==(const ConstantPotential&) const = default;
};
/// Uniform disorder on [-width, width], reproducible from the seed.
struct RandomPotential {
    std::uint64_t seed = 0;
    double width = 1.0;
    bool operator==(const RandomPotential&) const = default;
};

using PotentialKind = std::variant<HarperPotential, ConstantPotential, RandomPotential>;

struct OperatorSpec {
    long L = 3;
    FluxRational flux{0, 3};
    long p = 0;
    double g = 0.0;
    Boundary boundary = Boundary::Periodic;
    PotentialKind potential = HarperPotential{};

    double k() const noexcept { return two_pi * static_cast<double>(p) / static_cast<double>(L); }
    bool operator==(const OperatorSpec&) const = default;
};

inline OperatorSpec harper_spec(long L, long q, long p, double g,
                                Boundary boundary = Boundary::Periodic,
                                PotentialKind potential = HarperPotential{}) {
    return OperatorSpec{L, FluxRational{q, L}, p, g, boundary, potential};
}

/// Throws std::invalid_argument when the parameters cannot describe an operator.
inline void validate(const OperatorSpec& spec) {
    if (spec.L < 3) throw std::invalid_argument("operator: L must be >= 3, got " + std::to_string(spec.L));
    if (spec.flux.L != spec.L)
        throw std::invalid_argument("operator: flux denominator must equal L");
    if (spec.p < 0 || spec.p >= spec.L)
        throw std::invalid_argument("operator: momentum index p must lie in [0, L)");
    if (!std::isfinite(spec.g)) throw std::invalid_argument("operator: g must be finite");
    if (std::abs(spec.g) > max_abs_g) throw std::invalid_argument("operator: |g| must be <= 20");
    if (const auto* c = std::get_if<ConstantPotential>(&spec.potential); c && !std::isfinite(c->c))
        throw std::invalid_argument("operator: constant potential must be finite");
    if (const auto* r = std::get_if<RandomPotential>(&spec.potential);
        r && (!std::isfinite(r->width) || r->width < 0.0))
        throw std::invalid_argument("operator: random potential width must be finite and >= 0");
}

namespace detail {

// splitmix64 finaliser; a counter-based stream keyed on (seed, site).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Uniform double in [0, 1) from the top 53 bits.
constexpr double unit_uniform(std::uint64_t seed, std::uint64_t site) noexcept {
    const std::uint64_t bits = splitmix64(seed ^ splitmix64(site + 1));
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// cos(2 pi j / L) evaluated on the reduced index so that j and L - j give
/// bit-identical results.
inline double lattice_cos(long j, long L) {
    j = ((j % L) + L) % L;
    const long folded = std::min(j, L - j);
    return std::cos(two_pi * static_cast<double>(folded) / static_cast<double>(L));
}

}  // namespace detail

/// Diagonal entry of row m. Harper: -2 cos(2 pi phi m + k); Constant: -c;
/// Random: -V_m with V_m uniform on [-W, W].
inline double onsite_potential(const OperatorSpec& spec, long m) {
    return std::visit(
        [&](const auto& pot) -> double {
            using P = std::decay_t<decltype(pot)>;
            if constexpr (std::is_same_v<P, HarperPotential>) {
                // Phase index q*m + p taken mod L exactly in integers.
                const long L = spec.L;
                const long j = (spec.flux.reduced() * (m % L) + spec.p) % L;
                return -2.0 * detail::lattice_cos(j, L);
            } else if constexpr (std::is_same_v<P, ConstantPotential>) {
                return -pot.c;
            } else {
                const double u = detail::unit_uniform(pot.seed, static_cast<std::uint64_t>(m));
                return -pot.width * (2.0 * u - 1.0);
            }
        },
        spec.potential);
}

/// Row m holds -e^{g} at column m+1 and -e^{-g} at column m-1; the periodic
/// ring adds the wrap bonds (L-1, 0) = -e^{g} and (0, L-1) = -e^{-g}.
inline DenseRealMatrix build_harper_matrix(const OperatorSpec& spec) {
    validate(spec);
    const auto L = static_cast<std::size_t>(spec.L);
    const double forward = -std::exp(spec.g);
    const double backward = -std::exp(-spec.g);
    DenseRealMatrix h(L);
    for (std::size_t m = 0; m < L; ++m) {
        h(m, m) = onsite_potential(spec, static_cast<long>(m));
        if (m + 1 < L) {
            h(m, m + 1) = forward;
            h(m + 1, m) = backward;
        }
    }
    if (spec.boundary == Boundary::Periodic) {
        h(L - 1, 0) = forward;
        h(0, L - 1) = backward;
    }
    return h;
}

inline constexpr long max_2d_lattice = 12;

/// Two-dimensional parent operator on an L x L torus, site index n*L + m.
/// Hops along n carry the Peierls phases e^{+-i 2 pi q m / L}; hops along m
/// carry the imaginary-vector-potential factors e^{+-g}. Hopping amplitude 1.
inline DenseComplexMatrix build_2d_hofstadter_matrix(long L, long q, double g) {
    if (L < 3) throw std::invalid_argument("2d operator: L must be >= 3");
    if (L > max_2d_lattice) throw std::invalid_argument("2d operator: L must be <= 12 (oracle scale)");
    if (q < 0 || q >= L) throw std::invalid_argument("2d operator: q must lie in [0, L)");
    if (!std::isfinite(g) || std::abs(g) > max_abs_g) throw std::invalid_argument("2d operator: bad g");

    const auto n = static_cast<std::size_t>(L * L);
    DenseComplexMatrix h(n);
    const auto index = [L](long row, long col) {
        return static_cast<std::size_t>(((row % L + L) % L) * L + ((col % L + L) % L));
    };
    const double forward = -std::exp(g);
    const double backward = -std::exp(-g);
    for (long nn = 0; nn < L; ++nn) {
        for (long m = 0; m < L; ++m) {
            const auto r = index(nn, m);
            const long j = (q * m) % L;
            const double angle = two_pi * static_cast<double>(j) / static_cast<double>(L);
            const complex_t phase = std::polar(1.0, angle);
            h(r, index(nn + 1, m)) += -phase;
            h(r, index(nn - 1, m)) += -std::conj(phase);
            h(r, index(nn, m + 1)) += forward;
            h(r, index(nn, m - 1)) += backward;
        }
    }
    return h;
}

}  // namespace cocoonlab
