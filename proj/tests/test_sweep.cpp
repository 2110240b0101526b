#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "cocoonlab/bifurcation.hpp"
#include "cocoonlab/sweep.hpp"

using namespace cocoonlab;

namespace {

using CellMap = std::map<std::pair<long, long>, std::vector<complex_t>>;

CellMap by_cell(const SweepDataset& d) {
    CellMap out;
    for (const auto& pt : d.points) out[{pt.q, pt.p}].emplace_back(pt.re, pt.im);
    return out;
}

bool same_points(const SweepDataset& a, const SweepDataset& b) {
    if (a.points.size() != b.points.size()) return false;
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        const auto &x = a.points[i], &y = b.points[i];
        if (x.q != y.q || x.p != y.p || x.eigen_index != y.eigen_index || x.re != y.re || x.im != y.im) return false;
    }
    return true;
}

}  // namespace

TEST(SpectrumFor, Ring) {
    const auto s = spectrum_for(harper_spec(3, 0, 0, 0.0));
    EXPECT_LT(match_multisets(s.eigenvalues, std::vector<complex_t>{-4.0, -1.0, -1.0}).max_distance, 1e-13);
    ASSERT_TRUE(s.source_spec.has_value());
    EXPECT_EQ(*s.source_spec, harper_spec(3, 0, 0, 0.0));
}

TEST(SpectrumFor, CirculantEllipse) {
    const double g = 0.1;
    const auto s = spectrum_for(harper_spec(50, 0, 0, g));
    std::vector<complex_t> want;
    for (int j = 0; j < 50; ++j) {
        const double t = two_pi * j / 50.0;
        want.emplace_back(-2 * std::cosh(g) * std::cos(t) - 2, -2 * std::sinh(g) * std::sin(t));
    }
    EXPECT_LT(match_multisets(s.eigenvalues, want).max_distance, 1e-10);
}

TEST(SpectrumFor, HermitianFluxOne) {
    const auto s = spectrum_for(harper_spec(50, 1, 0, 0.0));
    for (const auto& z : s.eigenvalues) {
        EXPECT_EQ(z.imag(), 0.0);
        EXPECT_LE(std::abs(z.real()), 4.0 + 1e-9);
    }
}

TEST(FluxSweep, HermitianPointCount) {
    const auto d = flux_sweep(10, 0.0, Boundary::Periodic);
    EXPECT_EQ(d.points.size(), 1000u);
    EXPECT_EQ(d.cells.size(), 100u);
    EXPECT_TRUE(d.complete());
    for (const auto& pt : d.points) EXPECT_LT(std::abs(pt.im), 1e-10);
}

TEST(FluxSweep, OrderingIsLexicographic) {
    const auto d = flux_sweep(6, 0.3, Boundary::Periodic);
    for (std::size_t i = 1; i < d.points.size(); ++i) {
        const auto &a = d.points[i - 1], &b = d.points[i];
        EXPECT_TRUE(std::tie(a.q, a.p, a.eigen_index) < std::tie(b.q, b.p, b.eigen_index));
    }
}

TEST(FluxSweep, ZeroFluxColumnIsCirculant) {
    const double g = 0.25;
    const long L = 10;
    const auto cells = by_cell(flux_sweep(L, g, Boundary::Periodic));
    for (long p = 0; p < L; ++p) {
        std::vector<complex_t> want;
        for (long j = 0; j < L; ++j) {
            const double t = two_pi * static_cast<double>(j) / static_cast<double>(L);
            want.emplace_back(-2 * std::cosh(g) * std::cos(t) - 2 * std::cos(two_pi * static_cast<double>(p) / L),
                              -2 * std::sinh(g) * std::sin(t));
        }
        EXPECT_LT(match_multisets(cells.at({0, p}), want).max_distance, 1e-10);
    }
}

TEST(FluxSweep, Subsets) {
    const auto d = flux_sweep(8, 0.2, Boundary::Periodic, {5, 1}, {3});
    EXPECT_EQ(d.points.size(), 16u);
    EXPECT_EQ(d.points.front().q, 1);
    EXPECT_EQ(d.points.back().q, 5);
    EXPECT_THROW(flux_sweep(8, 0.2, Boundary::Periodic, {8}), std::invalid_argument);
    EXPECT_THROW(flux_sweep(8, 0.2, Boundary::Periodic, {1, 1}), std::invalid_argument);
}

TEST(FluxSweep, WorkerCountNeverChangesOutput) {
    SweepOptions one, many;
    one.workers = 1;
    many.workers = 7;
    const auto a = flux_sweep(12, -0.25, Boundary::Periodic, {}, {}, HarperPotential{}, one);
    const auto b = flux_sweep(12, -0.25, Boundary::Periodic, {}, {}, HarperPotential{}, many);
    EXPECT_TRUE(same_points(a, b));
}

TEST(FluxSweep, DatasetSymmetries) {
    const long L = 10;
    const auto cells = by_cell(flux_sweep(L, 0.4, Boundary::Periodic));
    for (long q = 0; q < L; ++q)
        for (long p = 0; p < L; ++p) {
            const auto& here = cells.at({q, p});
            EXPECT_LT(match_multisets(here, cells.at({(L - q) % L, (L - p) % L})).max_distance, 1e-8);
            auto neg = cells.at({q, (p + L / 2) % L});
            for (auto& z : neg) z = -z;
            EXPECT_LT(match_multisets(here, neg).max_distance, 1e-8);
        }
}

TEST(FluxSweep, CellStatusesCarryResiduals) {
    const auto d = flux_sweep(6, 0.5, Boundary::Periodic);
    for (const auto& c : d.cells) {
        EXPECT_TRUE(c.ok);
        EXPECT_LT(c.max_residual, 1e-10);
    }
}

TEST(GSweep, FluxOneStartsRealThenJumpsEvenly) {
    const auto grid = make_grid(0.0, 0.5, 0.01);
    ASSERT_EQ(grid.size(), 51u);
    const auto d = g_sweep(50, 1, grid, distinct_momentum_sectors(50, 1));
    EXPECT_EQ(d.slices.front().complex_count, 0u);
    EXPECT_EQ(d.slices[1].complex_count, 0u);  // g = 0.01 is below the first transition
    std::size_t last = 0;
    for (const auto& s : d.slices) {
        EXPECT_EQ(s.complex_count % 2, 0u);
        last = s.complex_count;
    }
    EXPECT_GT(last, 0u);
}

TEST(GSweep, ZeroFluxComplexForEveryPositiveG) {
    const auto d = g_sweep(50, 0, make_grid(0.0, 0.5, 0.05), {0, 7});
    EXPECT_EQ(d.slices.front().complex_count, 0u);
    for (std::size_t i = 1; i < d.slices.size(); ++i) EXPECT_GT(d.slices[i].complex_count, 0u);
}

TEST(GSweep, EndpointsAtSixSites) {
    const auto d = g_sweep(6, 1, {0.0, 2.0});
    ASSERT_EQ(d.slices.size(), 2u);
    EXPECT_EQ(d.slices[0].points.size(), 36u);
    EXPECT_EQ(d.slices[0].complex_count, 0u);
    EXPECT_GT(d.slices[1].complex_count, 0u);
}

TEST(GSweep, RejectsBadGrids) {
    EXPECT_THROW(g_sweep(6, 1, {0.0}), std::invalid_argument);
    EXPECT_THROW(g_sweep(6, 1, {0.1, 0.1}), std::invalid_argument);
    EXPECT_THROW(g_sweep(6, 1, {0.2, 0.1}), std::invalid_argument);
    EXPECT_THROW(make_grid(0.0, 1.0, 0.0), std::invalid_argument);
}

TEST(MomentumSectors, TranslationEquivalentSectorsShareSpectra) {
    // gcd(q, L) = 2: p and p + 2 give the same spectrum
    const auto a = spectrum_for(harper_spec(10, 4, 1, 0.3));
    const auto b = spectrum_for(harper_spec(10, 4, 3, 0.3));
    EXPECT_LT(match_multisets(a.eigenvalues, b.eigenvalues).max_distance, 1e-10);
    EXPECT_EQ(distinct_momentum_sectors(10, 4), (std::vector<long>{0, 1}));
    EXPECT_EQ(distinct_momentum_sectors(50, 1), (std::vector<long>{0}));
    EXPECT_EQ(distinct_momentum_sectors(6, 0).size(), 6u);
}

TEST(DefaultTolIm, ScalesWithMatrixNorm) {
    const auto h = build_harper_matrix(harper_spec(50, 1, 0, 0.0));
    EXPECT_NEAR(default_tol_im(h), 1e-7 * frobenius_norm(h) / std::sqrt(50.0), 1e-22);
}
