#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "cocoonlab/operator.hpp"

using namespace cocoonlab;

TEST(OnsitePotential, HarperValues) {
    EXPECT_NEAR(onsite_potential(harper_spec(4, 1, 0, 0.0), 2), 2.0, 1e-15);
    for (long m = 0; m < 4; ++m) EXPECT_EQ(onsite_potential(harper_spec(4, 0, 0, 0.0), m), -2.0);
    EXPECT_NEAR(onsite_potential(harper_spec(8, 1, 2, 0.0), 0), 0.0, 1e-15);
}

TEST(OnsitePotential, ConstantAndRandom) {
    const auto c = harper_spec(5, 0, 0, 0.0, Boundary::Periodic, ConstantPotential{1.5});
    for (long m = 0; m < 5; ++m) EXPECT_EQ(onsite_potential(c, m), -1.5);

    const auto r = harper_spec(16, 0, 0, 0.0, Boundary::Periodic, RandomPotential{42, 2.0});
    const auto r2 = harper_spec(16, 0, 0, 0.0, Boundary::Periodic, RandomPotential{43, 2.0});
    bool differs = false;
    for (long m = 0; m < 16; ++m) {
        const double v = onsite_potential(r, m);
        EXPECT_LE(std::abs(v), 2.0);
        EXPECT_EQ(v, onsite_potential(r, m));
        differs = differs || v != onsite_potential(r2, m);
    }
    EXPECT_TRUE(differs);
}

TEST(OnsitePotential, RandomStreamIsFrozen) {
    // Platform-stable stream: these values must never change.
    EXPECT_EQ(detail::splitmix64(0), 0xe220a8397b1dcdafULL);
    const auto r = harper_spec(4, 0, 0, 0.0, Boundary::Periodic, RandomPotential{7, 1.0});
    const double v0 = onsite_potential(r, 0);
    EXPECT_EQ(v0, -(2.0 * detail::unit_uniform(7, 0) - 1.0));
    EXPECT_GE(detail::unit_uniform(7, 0), 0.0);
    EXPECT_LT(detail::unit_uniform(7, 0), 1.0);
}

TEST(HarperMatrix, ZeroFluxRing) {
    const auto h = build_harper_matrix(harper_spec(4, 0, 0, 0.0));
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) {
            const long d = std::labs(static_cast<long>(r) - static_cast<long>(c));
            const double want = r == c ? -2.0 : (d == 1 || d == 3) ? -1.0 : 0.0;
            EXPECT_EQ(h(r, c), want) << r << "," << c;
        }
}

TEST(HarperMatrix, QuarterFluxDiagonal) {
    const auto h = build_harper_matrix(harper_spec(4, 1, 0, 0.0));
    const double want[] = {-2, 0, 2, 0};
    for (std::size_t m = 0; m < 4; ++m) EXPECT_NEAR(h(m, m), want[m], 1e-15);
    EXPECT_EQ(h(0, 1), -1.0);
    EXPECT_EQ(h(3, 0), -1.0);
}

TEST(HarperMatrix, OpenChainOrientation) {
    const auto h = build_harper_matrix(harper_spec(4, 0, 0, 0.5, Boundary::Open));
    for (std::size_t m = 0; m + 1 < 4; ++m) {
        EXPECT_EQ(h(m, m + 1), -std::exp(0.5));
        EXPECT_EQ(h(m + 1, m), -std::exp(-0.5));
    }
    EXPECT_EQ(h(3, 0), 0.0);
    EXPECT_EQ(h(0, 3), 0.0);
}

TEST(HarperMatrix, PeriodicWrapOrientation) {
    const auto h = build_harper_matrix(harper_spec(5, 2, 1, 0.3));
    EXPECT_EQ(h(4, 0), -std::exp(0.3));
    EXPECT_EQ(h(0, 4), -std::exp(-0.3));
}

TEST(HarperMatrix, RejectsBadSpecs) {
    EXPECT_THROW(build_harper_matrix(harper_spec(2, 0, 0, 0.0)), std::invalid_argument);
    EXPECT_THROW(build_harper_matrix(harper_spec(5, 0, 0, NAN)), std::invalid_argument);
    EXPECT_THROW(build_harper_matrix(harper_spec(5, 0, 0, INFINITY)), std::invalid_argument);
    EXPECT_THROW(build_harper_matrix(harper_spec(5, 0, 0, 20.5)), std::invalid_argument);
    EXPECT_THROW(build_harper_matrix(harper_spec(5, 0, 5, 0.0)), std::invalid_argument);
    EXPECT_THROW(build_harper_matrix(harper_spec(5, 0, -1, 0.0)), std::invalid_argument);
    EXPECT_THROW(build_harper_matrix(harper_spec(5, 0, 0, 0.0, Boundary::Periodic, RandomPotential{1, -1.0})),
                 std::invalid_argument);
}

class HarperProperties : public ::testing::TestWithParam<long> {};

TEST_P(HarperProperties, StructuralInvariants) {
    const long L = GetParam();
    for (long q = 0; q < L; ++q) {
        for (long p = 0; p < L; p += 2) {
            // g = 0 is exactly symmetric
            const auto h0 = build_harper_matrix(harper_spec(L, q, p, 0.0));
            EXPECT_EQ(h0, transpose(h0));
            // transpose maps g to -g
            const auto hg = build_harper_matrix(harper_spec(L, q, p, 0.37));
            EXPECT_EQ(transpose(hg), build_harper_matrix(harper_spec(L, q, p, -0.37)));
            // flux periodicity
            EXPECT_EQ(hg, build_harper_matrix(harper_spec(L, q + L, p, 0.37)));
            // structural nonzeros per row: diagonal + 2 hops
            const auto ho = build_harper_matrix(harper_spec(L, q, p, 0.37, Boundary::Open));
            for (std::size_t r = 0; r < static_cast<std::size_t>(L); ++r) {
                int off = 0, off_open = 0;
                for (std::size_t c = 0; c < static_cast<std::size_t>(L); ++c) {
                    if (c != r && hg(r, c) != 0.0) ++off;
                    if (c != r && ho(r, c) != 0.0) ++off_open;
                }
                EXPECT_EQ(off, 2);
                EXPECT_EQ(off_open, (r == 0 || r + 1 == static_cast<std::size_t>(L)) ? 1 : 2);
            }
        }
    }
}

INSTANTIATE_TEST_SUITE_P(Sizes, HarperProperties, ::testing::Values(3L, 4L, 7L, 12L, 50L));

TEST(Hofstadter2D, PlainRing) {
    const auto h = build_2d_hofstadter_matrix(3, 0, 0.0);
    ASSERT_EQ(h.size(), 9u);
    for (std::size_t r = 0; r < 9; ++r) {
        EXPECT_EQ(h(r, r), complex_t{});
        int count = 0;
        for (std::size_t c = 0; c < 9; ++c) {
            if (c == r) continue;
            EXPECT_EQ(h(r, c).imag(), 0.0);
            if (h(r, c) != complex_t{}) {
                EXPECT_EQ(h(r, c), complex_t(-1.0));
                ++count;
            }
        }
        EXPECT_EQ(count, 4);
    }
}

TEST(Hofstadter2D, PeierlsPhase) {
    const auto h = build_2d_hofstadter_matrix(4, 1, 0.0);
    // (n=0, m=1) -> (n=1, m=1): -e^{i pi/2} = -i
    const auto e = h(0 * 4 + 1, 1 * 4 + 1);
    EXPECT_NEAR(e.real(), 0.0, 1e-15);
    EXPECT_NEAR(e.imag(), -1.0, 1e-15);
}

TEST(Hofstadter2D, NonHermitianBonds) {
    const auto h = build_2d_hofstadter_matrix(4, 0, 0.3);
    EXPECT_EQ(h(0, 1), complex_t(-std::exp(0.3)));
    EXPECT_EQ(h(1, 0), complex_t(-std::exp(-0.3)));
    EXPECT_EQ(h(0, 4), complex_t(-1.0));
    EXPECT_EQ(h(4, 0), complex_t(-1.0));
}

TEST(Hofstadter2D, FourOffDiagonalsPerRow) {
    for (long L : {4L, 5L, 6L}) {
        for (long q = 0; q < L; ++q) {
            const auto h = build_2d_hofstadter_matrix(L, q, 0.25);
            const auto n = h.size();
            for (std::size_t r = 0; r < n; ++r) {
                int count = 0;
                for (std::size_t c = 0; c < n; ++c)
                    if (c != r && h(r, c) != complex_t{}) ++count;
                EXPECT_EQ(count, 4);
            }
        }
    }
}

TEST(Hofstadter2D, RejectsOutOfRange) {
    EXPECT_THROW(build_2d_hofstadter_matrix(13, 0, 0.0), std::invalid_argument);
    EXPECT_THROW(build_2d_hofstadter_matrix(2, 0, 0.0), std::invalid_argument);
    EXPECT_THROW(build_2d_hofstadter_matrix(4, 4, 0.0), std::invalid_argument);
    EXPECT_THROW(build_2d_hofstadter_matrix(4, 0, NAN), std::invalid_argument);
}
