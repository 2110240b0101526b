#pragma once

// Dense eigenvalues of real non-symmetric matrices.
//
// Pipeline: diagonal balancing (radix 2, exact in floating point; symmetrizable
// tridiagonal input is symmetrized outright), Householder
// reduction to upper Hessenberg form, then Francis implicit double-shift QR on
// the Hessenberg matrix. Every arithmetic step is real, so a 2x2 block of the
// final quasi-triangular form yields an exactly conjugate pair p +- iz and a
// 1x1 block yields an eigenvalue whose imaginary part is exactly zero.
//
// Eigenvectors come from inverse iteration on the complex shifted matrix.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cocoonlab/errors.hpp"
#include "cocoonlab/matrix.hpp"
#include "cocoonlab/operator.hpp"
#include "cocoonlab/spectrum.hpp"

namespace cocoonlab {

inline constexpr double default_deflation_tol = 1e-13;
inline constexpr std::size_t qr_sweeps_per_row = 40;

struct EigenOptions {
    double tol = default_deflation_tol;
    /// Eigenvalues whose residual is spot-checked by inverse iteration.
    std::size_t residual_spot_checks = 2;
};

namespace detail {

/// In-place similarity D^{-1} A D with D a power-of-two diagonal chosen so
/// that row and column 1-norms become comparable.
inline void balance(DenseRealMatrix& a) {
    constexpr double radix = 2.0;
    constexpr double sqr_radix = radix * radix;
    const std::size_t n = a.size();
    bool done = false;
    while (!done) {
        done = true;
        for (std::size_t i = 0; i < n; ++i) {
            double r = 0.0;
            double c = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(a(j, i));
                r += std::abs(a(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double g = r / radix;
            double f = 1.0;
            const double s = c + r;
            while (c < g) {
                f *= radix;
                c *= sqr_radix;
            }
            g = r * radix;
            while (c > g) {
                f /= radix;
                c /= sqr_radix;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                g = 1.0 / f;
                for (std::size_t j = 0; j < n; ++j) a(i, j) *= g;
                for (std::size_t j = 0; j < n; ++j) a(j, i) *= f;
            }
        }
    }
}

/// A tridiagonal matrix whose every off-diagonal pair satisfies
/// a(i, i+1) a(i+1, i) > 0 (or both vanish) is diagonally similar to a
/// symmetric one. Replaces such a matrix by its symmetric form in place and
/// returns true; leaves anything else untouched. Powers-of-two balancing
/// cannot detect this case because row and column sums already agree.
inline bool symmetrize_tridiagonal(DenseRealMatrix& a) {
    const std::size_t n = a.size();
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            if ((r > c + 1 || c > r + 1) && a(r, c) != 0.0) return false;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double up = a(i, i + 1);
        const double down = a(i + 1, i);
        if (up == 0.0 && down == 0.0) continue;
        if (!(up * down > 0.0)) return false;
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double up = a(i, i + 1);
        const double down = a(i + 1, i);
        if (up == down) continue;
        const double mag = std::sqrt(std::abs(up)) * std::sqrt(std::abs(down));
        a(i, i + 1) = a(i + 1, i) = std::copysign(mag, up);
    }
    return true;
}

/// Householder reduction to upper Hessenberg form; entries below the first
/// subdiagonal are set to zero on exit.
inline void reduce_to_hessenberg(DenseRealMatrix& h) {
    const std::size_t n = h.size();
    if (n < 3) return;
    std::vector<double> u(n, 0.0);
    for (std::size_t m = 1; m + 1 < n; ++m) {
        double scale = 0.0;
        for (std::size_t i = m; i < n; ++i) scale += std::abs(h(i, m - 1));
        if (scale == 0.0) continue;

        double sigma = 0.0;
        for (std::size_t i = n; i-- > m;) {
            u[i] = h(i, m - 1) / scale;
            sigma += u[i] * u[i];
        }
        double alpha = std::sqrt(sigma);
        if (u[m] > 0.0) alpha = -alpha;
        sigma -= u[m] * alpha;
        u[m] -= alpha;

        // H <- (I - u u^T / sigma) H (I - u u^T / sigma)
        for (std::size_t j = m; j < n; ++j) {
            double f = 0.0;
            for (std::size_t i = n; i-- > m;) f += u[i] * h(i, j);
            f /= sigma;
            for (std::size_t i = m; i < n; ++i) h(i, j) -= f * u[i];
        }
        for (std::size_t i = 0; i < n; ++i) {
            double f = 0.0;
            for (std::size_t j = n; j-- > m;) f += u[j] * h(i, j);
            f /= sigma;
            for (std::size_t j = m; j < n; ++j) h(i, j) -= f * u[j];
        }
        h(m, m - 1) = scale * alpha;
    }
    for (std::size_t r = 2; r < n; ++r)
        for (std::size_t c = 0; c + 1 < r; ++c) h(r, c) = 0.0;
}

/// Francis double-shift QR on an upper Hessenberg matrix (destroyed).
/// Deflates h(l, l-1) once |h(l, l-1)| <= tol * (|h(l-1, l-1)| + |h(l, l)|).
inline std::vector<complex_t> hessenberg_qr_eigenvalues(DenseRealMatrix& h, double tol) {
    const int nn = static_cast<int>(h.size());
    std::vector<complex_t> out(static_cast<std::size_t>(nn));
    if (nn == 0) return out;

    double norm = 0.0;
    for (int i = 0; i < nn; ++i)
        for (int j = std::max(i - 1, 0); j < nn; ++j) norm += std::abs(h(i, j));

    const std::size_t sweep_cap = qr_sweeps_per_row * static_cast<std::size_t>(nn);
    std::size_t sweeps = 0;
    int n = nn - 1;
    int iter = 0;
    double exshift = 0.0;
    double p = 0.0, q = 0.0, r = 0.0, s = 0.0, z = 0.0;
    double w = 0.0, x = 0.0, y = 0.0;

    const auto at = [&h](int i, int j) -> double& {
        return h(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    };

    while (n >= 0) {
        int l = n;
        while (l > 0) {
            s = std::abs(at(l - 1, l - 1)) + std::abs(at(l, l));
            if (s == 0.0) s = norm;
            if (std::abs(at(l, l - 1)) <= tol * s) break;
            --l;
        }

        if (l == n) {
            out[static_cast<std::size_t>(n)] = {at(n, n) + exshift, 0.0};
            --n;
            iter = 0;
        } else if (l == n - 1) {
            w = at(n, n - 1) * at(n - 1, n);
            p = (at(n - 1, n - 1) - at(n, n)) / 2.0;
            q = p * p + w;
            z = std::sqrt(std::abs(q));
            x = at(n, n) + exshift;
            if (q >= 0.0) {
                z = (p >= 0.0) ? p + z : p - z;
                const double upper = x + z;
                const double lower = (z != 0.0) ? x - w / z : upper;
                out[static_cast<std::size_t>(n - 1)] = {upper, 0.0};
                out[static_cast<std::size_t>(n)] = {lower, 0.0};
            } else {
                out[static_cast<std::size_t>(n - 1)] = {x + p, z};
                out[static_cast<std::size_t>(n)] = {x + p, -z};
            }
            n -= 2;
            iter = 0;
        } else {
            if (++sweeps > sweep_cap)
                throw numerical_error("eigenvalues: QR iteration did not converge within " +
                                      std::to_string(sweep_cap) + " sweeps");
            x = at(n, n);
            y = at(n - 1, n - 1);
            w = at(n, n - 1) * at(n - 1, n);

            // Exceptional shifts after stagnation.
            if (iter == 10) {
                exshift += x;
                for (int i = 0; i <= n; ++i) at(i, i) -= x;
                s = std::abs(at(n, n - 1)) + std::abs(at(n - 1, n - 2));
                x = y = 0.75 * s;
                w = -0.4375 * s * s;
            }
            if (iter == 30) {
                s = (y - x) / 2.0;
                s = s * s + w;
                if (s > 0.0) {
                    s = std::sqrt(s);
                    if (y < x) s = -s;
                    s = x - w / ((y - x) / 2.0 + s);
                    for (int i = 0; i <= n; ++i) at(i, i) -= s;
                    exshift += s;
                    x = y = w = 0.964;
                }
            }
            ++iter;

            // Two consecutive small subdiagonal elements.
            int m = n - 2;
            while (m >= l) {
                z = at(m, m);
                r = x - z;
                s = y - z;
                p = (r * s - w) / at(m + 1, m) + at(m, m + 1);
                q = at(m + 1, m + 1) - z - r - s;
                r = at(m + 2, m + 1);
                s = std::abs(p) + std::abs(q) + std::abs(r);
                p /= s;
                q /= s;
                r /= s;
                if (m == l) break;
                const double lhs = std::abs(at(m, m - 1)) * (std::abs(q) + std::abs(r));
                const double rhs = std::numeric_limits<double>::epsilon() *
                                   (std::abs(p) * (std::abs(at(m - 1, m - 1)) + std::abs(z) +
                                                   std::abs(at(m + 1, m + 1))));
                if (lhs < rhs) break;
                --m;
            }
            for (int i = m + 2; i <= n; ++i) {
                at(i, i - 2) = 0.0;
                if (i > m + 2) at(i, i - 3) = 0.0;
            }

            // Double QR step on rows l..n and columns m..n.
            for (int k = m; k <= n - 1; ++k) {
                const bool notlast = (k != n - 1);
                if (k != m) {
                    p = at(k, k - 1);
                    q = at(k + 1, k - 1);
                    r = notlast ? at(k + 2, k - 1) : 0.0;
                    x = std::abs(p) + std::abs(q) + std::abs(r);
                    if (x == 0.0) continue;
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = std::sqrt(p * p + q * q + r * r);
                if (p < 0.0) s = -s;
                if (s == 0.0) continue;
                if (k != m)
                    at(k, k - 1) = -s * x;
                else if (l != m)
                    at(k, k - 1) = -at(k, k - 1);
                p += s;
                x = p / s;
                y = q / s;
                z = r / s;
                q /= p;
                r /= p;

                for (int j = k; j <= n; ++j) {
                    p = at(k, j) + q * at(k + 1, j);
                    if (notlast) {
                        p += r * at(k + 2, j);
                        at(k + 2, j) -= p * z;
                    }
                    at(k, j) -= p * x;
                    at(k + 1, j) -= p * y;
                }
                const int imax = std::min(n, k + 3);
                for (int i = l; i <= imax; ++i) {
                    p = x * at(i, k) + y * at(i, k + 1);
                    if (notlast) {
                        p += z * at(i, k + 2);
                        at(i, k + 2) -= p * r;
                    }
                    at(i, k) -= p;
                    at(i, k + 1) -= p * q;
                }
            }
        }
    }
    return out;
}

/// LU factorisation with partial pivoting of a complex matrix; pivots that
/// vanish to working precision are replaced by `floor` (shift regularisation).
class ComplexLU {
public:
    ComplexLU(DenseComplexMatrix a, double floor) : lu_(std::move(a)), piv_(lu_.size()) {
        const std::size_t n = lu_.size();
        for (std::size_t i = 0; i < n; ++i) piv_[i] = i;
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t best = k;
            double best_abs = std::abs(lu_(k, k));
            for (std::size_t i = k + 1; i < n; ++i) {
                const double v = std::abs(lu_(i, k));
                if (v > best_abs) {
                    best_abs = v;
                    best = i;
                }
            }
            if (best != k) {
                std::swap_ranges(lu_.row(k).begin(), lu_.row(k).end(), lu_.row(best).begin());
                std::swap(piv_[k], piv_[best]);
            }
            if (std::abs(lu_(k, k)) < floor) lu_(k, k) = floor;
            const complex_t inv = 1.0 / lu_(k, k);
            for (std::size_t i = k + 1; i < n; ++i) {
                const complex_t f = lu_(i, k) * inv;
                lu_(i, k) = f;
                if (f == complex_t{}) continue;
                for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
            }
        }
    }

    std::vector<complex_t> solve(std::span<const complex_t> b) const {
        const std::size_t n = lu_.size();
        std::vector<complex_t> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = b[piv_[i]];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
        for (std::size_t i = n; i-- > 0;) {
            for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu_(i, j) * x[j];
            x[i] /= lu_(i, i);
        }
        return x;
    }

private:
    DenseComplexMatrix lu_;
    std::vector<std::size_t> piv_;
};

inline DenseComplexMatrix shifted(const DenseRealMatrix& a, complex_t shift) {
    DenseComplexMatrix m(a.size());
    for (std::size_t r = 0; r < a.size(); ++r) {
        for (std::size_t c = 0; c < a.size(); ++c) m(r, c) = a(r, c);
        m(r, r) -= shift;
    }
    return m;
}

inline void normalize(std::vector<complex_t>& v) {
    const double nv = norm2(v);
    for (auto& x : v) x /= nv;
}

/// Largest-magnitude component made real positive; ties go to the lowest index.
inline void fix_phase(std::vector<complex_t>& v) {
    std::size_t best = 0;
    double best_abs = -1.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]);
        if (a > best_abs) {
            best_abs = a;
            best = i;
        }
    }
    if (best_abs <= 0.0) return;
    const complex_t rot = std::conj(v[best]) / best_abs;
    for (auto& x : v) x *= rot;
    v[best] = {std::abs(v[best]), 0.0};
}

inline std::vector<complex_t> start_vector(std::size_t n) {
    std::vector<complex_t> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = unit_uniform(0x5eed, i);
        v[i] = {1.0 + u, 0.5 - u};
    }
    normalize(v);
    return v;
}

inline double residual_norm(const DenseRealMatrix& a, std::span<const complex_t> v, complex_t lambda) {
    auto av = multiply(a, v);
    for (std::size_t i = 0; i < av.size(); ++i) av[i] -= lambda * v[i];
    return norm2(av);
}

inline double shift_floor(double scale) {
    return std::numeric_limits<double>::epsilon() * std::max(scale, 1e-300);
}

/// Two steps of fixed-shift inverse iteration; residual of the given value.
inline double spot_residual(const DenseRealMatrix& a, complex_t lambda, double scale) {
    const ComplexLU lu(shifted(a, lambda), shift_floor(scale));
    auto v = start_vector(a.size());
    for (int it = 0; it < 2; ++it) {
        v = lu.solve(v);
        normalize(v);
    }
    return residual_norm(a, v, lambda);
}

}  // namespace detail

/// All eigenvalues of a real square matrix, canonically ordered. The result
/// is closed under conjugation exactly. Throws numerical_error when the QR
/// iteration exceeds 40 n sweeps and std::invalid_argument on bad input.
inline Spectrum eigenvalues(const DenseRealMatrix& a, const EigenOptions& opt = {}) {
    if (a.size() == 0) throw std::invalid_argument("eigenvalues: empty matrix");
    if (!all_finite(a)) throw std::invalid_argument("eigenvalues: non-finite entry");
    if (!(opt.tol >= 1e-15 && opt.tol <= 1e-6))
        throw std::invalid_argument("eigenvalues: tol must lie in [1e-15, 1e-6]");

    DenseRealMatrix h = a;
    if (!detail::symmetrize_tridiagonal(h)) detail::balance(h);
    detail::reduce_to_hessenberg(h);
    Spectrum s = make_spectrum(detail::hessenberg_qr_eigenvalues(h, opt.tol));

    if (opt.residual_spot_checks > 0) {
        const double scale = frobenius_norm(a);
        const std::size_t n = s.size();
        const std::size_t checks = std::min(opt.residual_spot_checks, n);
        for (std::size_t c = 0; c < checks; ++c) {
            // Spread deterministically over the canonical order.
            const std::size_t idx = (checks == 1) ? 0 : c * (n - 1) / (checks - 1);
            s.max_residual = std::max(s.max_residual, detail::spot_residual(a, s.eigenvalues[idx], scale));
        }
    }
    return s;
}

struct EigenPairOptions {
    double residual_rel = 1e-10;
    int fixed_shift_steps = 3;
    int max_iterations = 50;
};

/// Eigenvector for the eigenvalue nearest `approx` by inverse iteration,
/// switching to Rayleigh-quotient shifts once the fixed shift has had a few
/// steps. The vector has unit norm and its largest component is real positive.
inline EigenPair eigenpair(const DenseRealMatrix& a, complex_t approx, const EigenPairOptions& opt = {}) {
    if (a.size() == 0) throw std::invalid_argument("eigenpair: empty matrix");
    if (!all_finite(a)) throw std::invalid_argument("eigenpair: non-finite entry");
    const double scale = frobenius_norm(a);
    const double target = opt.residual_rel * std::max(scale, 1e-300);

    complex_t shift = approx;
    auto v = detail::start_vector(a.size());
    complex_t lambda = approx;
    double res = std::numeric_limits<double>::infinity();
    for (int it = 0; it < opt.max_iterations; ++it) {
        const detail::ComplexLU lu(detail::shifted(a, shift), detail::shift_floor(scale));
        v = lu.solve(v);
        const double nv = norm2(v);
        if (!std::isfinite(nv) || nv == 0.0)
            throw numerical_error("eigenpair: inverse iteration produced a degenerate vector");
        for (auto& x : v) x /= nv;

        const auto av = multiply(a, v);
        complex_t rq{};
        for (std::size_t i = 0; i < v.size(); ++i) rq += std::conj(v[i]) * av[i];
        const double res_rq = detail::residual_norm(a, v, rq);
        const double res_shift = detail::residual_norm(a, v, shift);
        // Keep whichever value explains the vector better.
        if (res_shift <= res_rq) {
            lambda = shift;
            res = res_shift;
        } else {
            lambda = rq;
            res = res_rq;
        }
        if (res <= target) break;
        if (it + 1 >= opt.fixed_shift_steps) shift = rq;
    }
    if (!(res <= target))
        throw numerical_error("eigenpair: inverse iteration did not reach residual target (shift may be "
                              "equidistant from two eigenvalues; perturb it)");
    detail::fix_phase(v);
    res = detail::residual_norm(a, v, lambda);
    return EigenPair{lambda, std::move(v), res};
}

inline constexpr std::size_t max_embedded_dimension = 144;

/// The embedding doubles every eigenvalue of H that is real and, more
/// generally, pairs spec(H) with its conjugate, so clusters are the rule.
/// Deflating at 1e-13 splits such clusters early and costs about sqrt(tol)
/// in accuracy; the tightest admissible tolerance is used instead.
inline constexpr EigenOptions embedding_defaults{1e-15, 2};

/// Eigenvalues of H = A + iB through the real matrix [[A, -B], [B, A]].
/// The returned 2n values are spec(H) united with conj(spec(H)).
inline Spectrum complex_eigenvalues_via_real_embedding(const DenseComplexMatrix& hm,
                                                       const EigenOptions& opt = embedding_defaults) {
    const std::size_t n = hm.size();
    if (n > max_embedded_dimension)
        throw std::invalid_argument("real embedding: dimension must be <= 144");
    DenseRealMatrix e(2 * n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const double re = hm(r, c).real();
            const double im = hm(r, c).imag();
            e(r, c) = re;
            e(r, c + n) = -im;
            e(r + n, c) = im;
            e(r + n, c + n) = re;
        }
    }
    return eigenvalues(e, opt);
}

}  // namespace cocoonlab
