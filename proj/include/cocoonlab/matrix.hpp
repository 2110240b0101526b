#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace cocoonlab {

using complex_t = std::complex<double>;

/// Square dense matrix stored row-major. entry(r, c) multiplies component c
/// of an input vector and contributes to component r of the output.
template <class T>
class DenseMatrix {
public:
    DenseMatrix() = default;
    explicit DenseMatrix(std::size_t n) : n_(n), a_(n * n, T{}) {}

    std::size_t size() const noexcept { return n_; }

    T& operator()(std::size_t r, std::size_t c) { return a_[r * n_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return a_[r * n_ + c]; }

    std::span<T> row(std::size_t r) { return {a_.data() + r * n_, n_}; }
    std::span<const T> row(std::size_t r) const { return {a_.data() + r * n_, n_}; }

    std::span<const T> entries() const noexcept { return a_; }
    std::span<T> entries() noexcept { return a_; }

    bool operator==(const DenseMatrix&) const = default;

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
        return m;
    }

private:
    std::size_t n_ = 0;
    std::vector<T> a_;
};

using DenseRealMatrix = DenseMatrix<double>;
using DenseComplexMatrix = DenseMatrix<complex_t>;

template <class T>
DenseMatrix<T> transpose(const DenseMatrix<T>& m) {
    DenseMatrix<T> t(m.size());
    for (std::size_t r = 0; r < m.size(); ++r)
        for (std::size_t c = 0; c < m.size(); ++c) t(c, r) = m(r, c);
    return t;
}

template <class T>
double frobenius_norm(const DenseMatrix<T>& m) {
    double s = 0.0;
    for (const auto& x : m.entries()) s += std::norm(x);
    return std::sqrt(s);
}

template <class T>
bool all_finite(const DenseMatrix<T>& m) {
    for (const auto& x : m.entries()) {
        if constexpr (std::is_same_v<T, double>) {
            if (!std::isfinite(x)) return false;
        } else {
            if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
        }
    }
    return true;
}

/// y = A x for a real or complex matrix and a complex vector.
template <class T>
std::vector<complex_t> multiply(const DenseMatrix<T>& a, std::span<const complex_t> x) {
    if (x.size() != a.size()) throw std::invalid_argument("multiply: dimension mismatch");
    std::vector<complex_t> y(a.size());
    for (std::size_t r = 0; r < a.size(); ++r) {
        complex_t s{};
        const auto row = a.row(r);
        for (std::size_t c = 0; c < a.size(); ++c) s += row[c] * x[c];
        y[r] = s;
    }
    return y;
}

inline double norm2(std::span<const complex_t> v) {
    double s = 0.0;
    for (const auto& x : v) s += std::norm(x);
    return std::sqrt(s);
}

}  // namespace cocoonlab
