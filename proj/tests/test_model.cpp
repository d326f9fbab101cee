#include "contact/errors.hpp"
#include "contact/model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <Eigen/Dense>

#include <random>
#include <set>

using namespace contact;

TEST(Pairs, TwoParticlesGiveOnePair) {
    auto spec = SystemSpec::make(2, {1, 1}, 1.0);
    auto p = enumerate_pairs(spec);
    ASSERT_EQ(p.size(), 1u);
    EXPECT_EQ(p[0].label(), "(1,2)");
}

TEST(Pairs, ThreeParticlesLexicographic) {
    auto spec = SystemSpec::make(3, {1, 1, 3}, 1.0);
    auto p = enumerate_pairs(spec);
    ASSERT_EQ(p.size(), 3u);
    EXPECT_EQ(p[0].label(), "(1,2)");
    EXPECT_EQ(p[1].label(), "(1,3)");
    EXPECT_EQ(p[2].label(), "(2,3)");
    EXPECT_DOUBLE_EQ(p[0].mu, 0.5);
    EXPECT_DOUBLE_EQ(p[1].mu, 0.75);
    EXPECT_DOUBLE_EQ(p[2].mu, 0.75);
    EXPECT_DOUBLE_EQ(p[1].M, 4.0);
}

TEST(Pairs, CountIsBinomialAndCoversAllPairs) {
    for (int n = 2; n <= 8; ++n) {
        auto spec = SystemSpec::make(n, std::vector<double>(n, 1.0), 1.0);
        auto p = enumerate_pairs(spec);
        ASSERT_EQ(static_cast<int>(p.size()), n * (n - 1) / 2);
        std::set<std::pair<int, int>> seen;
        for (const auto& q : p) {
            EXPECT_LT(q.i, q.j);
            seen.insert({q.i, q.j});
        }
        EXPECT_EQ(seen.size(), p.size());
    }
}

TEST(Pairs, ReducedMassSymmetricAndBelowEachMass) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.1, 5.0);
    for (int t = 0; t < 100; ++t) {
        const double a = U(rng), b = U(rng);
        auto s1 = SystemSpec::make(2, {a, b}, 1.0);
        auto s2 = SystemSpec::make(2, {b, a}, 1.0);
        auto p1 = enumerate_pairs(s1)[0], p2 = enumerate_pairs(s2)[0];
        EXPECT_DOUBLE_EQ(p1.mu, p2.mu);
        EXPECT_DOUBLE_EQ(p1.M, p2.M);
        EXPECT_LT(p1.mu, std::min(a, b));
        EXPECT_NEAR(p1.mu, a * b / (a + b), 1e-15);
    }
}

TEST(Spec, RejectsInvalidInput) {
    EXPECT_THROW(SystemSpec::make(1, {1}, 1.0), ConfigError);
    EXPECT_THROW(SystemSpec::make(2, {1}, 1.0), ConfigError);
    EXPECT_THROW(SystemSpec::make(2, {1, -1}, 1.0), ConfigError);
    EXPECT_THROW(SystemSpec::make(2, {1, 1}, 0.0), ConfigError);
    EXPECT_NO_THROW(SystemSpec::make_free(2, {1, 1}));
}

TEST(PairFrameCoords, EqualMassMidpoint) {
    auto spec = SystemSpec::make(3, {1, 1, 1}, 1.0);
    auto s = make_pair_index(spec, 0, 1);
    auto pc = to_pair_frame({2, 0, 5}, spec, s);
    EXPECT_DOUBLE_EQ(pc.r, 2.0);
    EXPECT_DOUBLE_EQ(pc.R, 1.0);
    ASSERT_EQ(pc.spectators.size(), 1u);
    EXPECT_DOUBLE_EQ(pc.spectators[0], 5.0);
}

TEST(PairFrameCoords, WeightedMean) {
    auto spec = SystemSpec::make(2, {1, 3}, 1.0);
    auto pc = to_pair_frame({4, 0}, spec, make_pair_index(spec, 0, 1));
    EXPECT_DOUBLE_EQ(pc.r, 4.0);
    EXPECT_DOUBLE_EQ(pc.R, 1.0);
}

TEST(PairFrameCoords, RoundTripRandom) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-10, 10), M(0.2, 4.0);
    for (int t = 0; t < 1000; ++t) {
        const int n = 2 + t % 4;
        std::vector<double> m(n), x(n);
        for (int k = 0; k < n; ++k) {
            m[k] = M(rng);
            x[k] = U(rng);
        }
        auto spec = SystemSpec::make(n, m, 1.0);
        for (const auto& s : enumerate_pairs(spec)) {
            auto back = from_pair_frame(to_pair_frame(x, spec, s), spec, s);
            for (int k = 0; k < n; ++k)
                ASSERT_NEAR(back[k], x[k], 1e-12);
        }
    }
}

TEST(PairFrameCoords, UnitJacobian) {
    // Columns of the linear map x -> (r, R, y) by finite differences of an
    // affine map are exact; the determinant must be 1.
    auto spec = SystemSpec::make(3, {1.3, 0.7, 2.0}, 1.0);
    auto s = make_pair_index(spec, 0, 2);
    Eigen::Matrix3d J;
    for (int c = 0; c < 3; ++c) {
        std::vector<double> e(3, 0.0);
        e[c] = 1.0;
        auto pc = to_pair_frame(e, spec, s);
        J(0, c) = pc.r;
        J(1, c) = pc.R;
        J(2, c) = pc.spectators[0];
    }
    EXPECT_NEAR(std::abs(J.determinant()), 1.0, 1e-14);
}

TEST(Bounds, ThreeEqualMasses) {
    auto bc = bound_constants(SystemSpec::make(3, {1, 1, 1}, 1.0));
    EXPECT_DOUBLE_EQ(bc.c_frak, 0.5);
    EXPECT_DOUBLE_EQ(bc.k_const, 1.0);
    EXPECT_DOUBLE_EQ(bc.z0, -12.25);
}

TEST(Bounds, TwoEqualMassesStrongCoupling) {
    auto bc = bound_constants(SystemSpec::make(2, {1, 1}, 2.0));
    EXPECT_DOUBLE_EQ(bc.c_frak, 0.5);
    EXPECT_DOUBLE_EQ(bc.k_const, 1.0);
    EXPECT_DOUBLE_EQ(bc.z0, -9.0);
}

TEST(Bounds, KTakesLargerPower) {
    EXPECT_DOUBLE_EQ(bound_constants(SystemSpec::make(2, {4, 1}, 1.0)).k_const, 16.0);
    EXPECT_DOUBLE_EQ(bound_constants(SystemSpec::make(2, {0.25, 0.5}, 1.0)).k_const, std::pow(0.5, 1.5));
}

TEST(Bounds, ThresholdQuadraticInCouplingAndMonotone) {
    double prev = 0.0;
    for (double g : {1e-3, 1e-2, 0.1, 1.0, 3.0}) {
        auto spec = SystemSpec::make(3, {1, 2, 3}, g);
        const double z0 = bound_constants(spec).z0;
        EXPECT_LT(z0, 0.0);
        EXPECT_LT(z0, prev);
        prev = z0;
        auto unit = bound_constants(SystemSpec::make(3, {1, 2, 3}, 1.0)).z0;
        EXPECT_NEAR(z0 / (g * g), unit, 1e-12 * std::abs(unit));
    }
}

TEST(Bounds, NeumannConditionsHoldBelowThreshold) {
    for (int n : {2, 3, 4})
        for (double g : {-2.0, 0.5, 1.0, 3.0}) {
            std::vector<double> m;
            for (int k = 0; k < n; ++k)
                m.push_back(0.5 + k);
            auto spec = SystemSpec::make(n, m, g);
            const double z0 = bound_constants(spec).z0;
            for (double f : {1.0001, 1.1, 2.0, 10.0, 1000.0}) {
                const double z = f * z0;
                EXPECT_LT(diagonal_ratio_bound(spec, z), 1.0);
                EXPECT_LT(offdiagonal_ratio_bound(spec, z), 1.0);
            }
        }
}
