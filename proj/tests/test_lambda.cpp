#include "contact/errors.hpp"
#include "contact/kernels.hpp"
#include "contact/lambda.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

using namespace contact;

namespace {

std::shared_ptr<const PairFrame> frame(const SystemSpec& spec, int i, int j, const Grid& g, double eps) {
    return std::make_shared<PairFrame>(spec, make_pair_index(spec, i, j), g, BumpProfile::make(), eps);
}

double rel(const Vec& a, const Vec& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

} // namespace

TEST(DiagonalSlice, LimitMultiplierAtZeroSpectatorMomentum) {
    auto spec = SystemSpec::make(2, {1, 1}, 1.0);
    auto nodes = make_r_nodes(BumpProfile::make(), 64);
    DiagonalSlice s(enumerate_pairs(spec)[0], 1.0, -4.0, 0.0, 0.0, nodes);
    // g sqrt(mu/2) / sqrt(0 - z) with mu = 1/2, z = -4.
    EXPECT_NEAR(s.multiplier(), 0.25, 1e-15);
    EXPECT_EQ(s.decay(), 0.0);
}

TEST(DiagonalSlice, LimitFactorizesAsRankOneTimesMultiplier) {
    auto spec = SystemSpec::make(2, {1, 3}, 1.3);
    auto nodes = make_r_nodes(BumpProfile::make(), 96);
    std::mt19937_64 rng(11);
    for (int t = 0; t < 50; ++t) {
        const double Q = 5.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        DiagonalSlice s(enumerate_pairs(spec)[0], 1.3, -2.0, Q, 0.0, nodes);
        const Vec x = random_vector(nodes.size(), rng, false);
        const Vec by_kernel = s.kernel().cast<cd>() * x;
        EXPECT_LT((by_kernel - s.apply_factorized(x)).norm(), 1e-10 * x.norm());
        EXPECT_LT((by_kernel - s.apply(x)).norm(), 1e-10 * x.norm());
    }
}

TEST(DiagonalSlice, RecursionMatchesDenseKernel) {
    auto spec = SystemSpec::make(2, {1, 1}, 1.0);
    auto nodes = make_r_nodes(BumpProfile::make(), 80);
    std::mt19937_64 rng(5);
    for (double eps : {0.05, 0.4, 3.0}) {
        DiagonalSlice s(enumerate_pairs(spec)[0], 1.0, -3.0, 0.7, eps, nodes);
        const Eigen::MatrixXd K = s.kernel();
        EXPECT_LT((K - K.transpose()).norm(), 1e-14 * K.norm());
        // Entry check against the closed form of the kernel.
        const double kappa = std::sqrt(2.0 * 0.5 * (0.7 + 3.0));
        const double c = std::sqrt(0.25) / std::sqrt(3.7);
        const double want = c * nodes.sqrt_wv[3] * std::exp(-eps * kappa * std::abs(nodes.r[3] - nodes.r[50])) *
                            nodes.sqrt_wv[50];
        EXPECT_NEAR(K(3, 50), want, 1e-15);
        const Vec x = random_vector(nodes.size(), rng, false);
        EXPECT_LT(rel(s.apply(x), K.cast<cd>() * x), 1e-12);
    }
}

TEST(DiagonalSlice, NormDecreasesWithEpsAndSpectatorEnergy) {
    auto spec = SystemSpec::make(2, {1, 1}, 1.0);
    auto nodes = make_r_nodes(BumpProfile::make(), 80);
    const auto p = enumerate_pairs(spec)[0];
    double prev = 1e300;
    for (double eps : {0.0, 0.05, 0.1, 0.2, 0.4}) {
        const double n = DiagonalSlice(p, 1.0, -4.0, 0.0, eps, nodes).norm();
        EXPECT_LT(n, prev);
        prev = n;
    }
    EXPECT_LT(DiagonalSlice(p, 1.0, -4.0, 2.0, 0.1, nodes).norm(), DiagonalSlice(p, 1.0, -4.0, 0.0, 0.1, nodes).norm());
    // At eps = 0 the norm is the multiplier times <u, u> = 1.
    EXPECT_NEAR(DiagonalSlice(p, 1.0, -4.0, 0.0, 0.0, nodes).norm(), 0.25 * nodes.v_norm_sq(), 1e-14);
    EXPECT_NEAR(nodes.v_norm_sq(), 1.0, 1e-10);
}

TEST(DiagonalBlock, LatticeLimitIsRankOneTimesLatticeMultiplier) {
    auto spec = SystemSpec::make(2, {1, 2}, 0.8);
    const Grid g = Grid::make(2, 6.0, 16);
    auto f = frame(spec, 0, 1, g, 0.0);
    DiagonalBlock blk(f, 0.8, -3.0, Representation::lattice);
    const Eigen::VectorXd D = f->lattice_D(-3.0);
    const auto& u = f->nodes().sqrt_wv;
    const int M = f->nodes().size();
    std::mt19937_64 rng(3);
    const Vec X = random_vector(f->chi_size(), rng, false);
    Vec want(X.size());
    for (int s = 0; s < f->slice_count(); ++s) {
        cd proj = 0.0;
        for (int a = 0; a < M; ++a)
            proj += u[a] * X[s * M + a];
        for (int a = 0; a < M; ++a)
            want[s * M + a] = 0.8 * D[s] * u[a] * proj;
    }
    EXPECT_LT(rel(blk.apply(X), want), 1e-12);
}

TEST(DiagonalBlock, SelfAdjointInBothRepresentations) {
    auto spec = SystemSpec::make(3, {1, 2, 1.5}, 1.0);
    const Grid g = Grid::make(3, 5.0, 8);
    std::mt19937_64 rng(21);
    for (double eps : {0.0, 0.3})
        for (auto rep : {Representation::lattice, Representation::continuum}) {
            DiagonalBlock blk(frame(spec, 0, 2, g, eps), 1.0, -20.0, rep);
            for (int t = 0; t < 5; ++t) {
                const Vec a = random_vector(blk.frame().chi_size(), rng);
                const Vec b = random_vector(blk.frame().chi_size(), rng);
                const cd ab = a.dot(blk.apply(b));
                const cd ba = b.dot(blk.apply(a));
                EXPECT_LT(std::abs(ab - std::conj(ba)), 1e-12);
                EXPECT_LT(std::abs(a.dot(blk.apply(a)).imag()), 1e-12);
            }
        }
}

TEST(DiagonalBlock, ExactNormAgreesWithPowerIteration) {
    auto spec = SystemSpec::make(2, {1, 1}, 1.0);
    const Grid g = Grid::make(2, 8.0, 16);
    for (auto rep : {Representation::lattice, Representation::continuum}) {
        DiagonalBlock blk(frame(spec, 0, 1, g, 0.2), 1.0, -4.0, rep);
        const auto est = operator_norm(blk.map(), 200, 2, 9);
        // Power iteration approaches from below.
        EXPECT_LE(est.value, blk.norm() * (1.0 + 1e-12));
        EXPECT_GT(est.value, blk.norm() * (1.0 - 1e-4));
    }
}

TEST(DiagonalBlock, NormBoundAcrossTwelveCombinations) {
    // Masses x coupling x (z, eps): the continuum slice norm is maximal at
    // Q = 0 and must sit below c_frak |g| / sqrt|z| up to 2% numerical slack.
    const std::vector<std::vector<double>> masses{{1, 1}, {0.5, 2}, {3, 1.5}};
    const std::vector<double> gs{0.5, 2.0};
    const std::vector<std::pair<double, double>> zeps{{-4.0, 0.1}, {-20.0, 0.05}};
    auto bump = BumpProfile::make();
    int count = 0;
    for (const auto& m : masses)
        for (double gc : gs)
            for (auto [z, eps] : zeps) {
                auto spec = SystemSpec::make(2, m, gc);
                const auto p = enumerate_pairs(spec)[0];
                const double kappa = std::sqrt(2.0 * p.mu * std::abs(z));
                auto nodes = make_r_nodes(bump, 2 * required_r_nodes(bump, eps, kappa));
                const double measured = continuum_diagonal_norm(p, gc, z, eps, nodes);
                const double bound = diagonal_norm_bound(spec, z);
                EXPECT_GT(measured, 0.0);
                EXPECT_LE(measured, 1.02 * bound) << "m=(" << m[0] << "," << m[1] << ") g=" << gc << " z=" << z;
                ++count;
            }
    EXPECT_EQ(count, 12);
}

TEST(LambdaInverse, DiagonalInverseNormBelowNeumannBound) {
    // ||(1 - phi)^{-1}|| <= 1 / (1 - c_frak |g| / sqrt|z|) = 4/3 at g = 1, z = -4.
    auto spec = SystemSpec::make(2, {1, 1}, 1.0);
    const Grid g = Grid::make(2, 8.0, 32);
    for (double eps : {0.0, 0.25}) {
        LambdaMatrix m(spec, {frame(spec, 0, 1, g, eps)}, -4.0);
        LambdaInverse inv(m, 1e-12, /*force=*/true);
        auto op = LinearMap::self_adjoint(m.size(), [&](const Vec& y) { return inv.apply_diag_inverse(y); });
        const double n = operator_norm(op, 60, 2, 4).value;
        EXPECT_LE(n, 4.0 / 3.0 + 1e-9);
        EXPECT_GE(n, 1.0 - 1e-9); // phi >= 0 for g > 0
    }
    // Continuum slice version at the worst slice.
    auto nodes = make_r_nodes(BumpProfile::make(), 96);
    const double phi = continuum_diagonal_norm(enumerate_pairs(spec)[0], 1.0, -4.0, 0.1, nodes);
    EXPECT_LE(1.0 / (1.0 - phi), 4.0 / 3.0 + 1e-12);
}

TEST(LambdaInverse, RoundTripWithinTolerance) {
    auto spec = SystemSpec::make(3, {1, 1, 1}, 1.0);
    const Grid g = Grid::make(3, 4.0, 8);
    std::mt19937_64 rng(8);
    for (double eps : {0.0, 0.3}) {
        std::vector<std::shared_ptr<const PairFrame>> fr;
        for (const auto& p : enumerate_pairs(spec))
            fr.push_back(std::make_shared<PairFrame>(spec, p, g, BumpProfile::make(), eps));
        LambdaMatrix m(spec, fr, -20.0);
        const double tol = 1e-10;
        LambdaInverse inv(m, tol);
        EXPECT_LT(inv.stats().off_ratio, 1.0);
        for (int t = 0; t < 4; ++t) {
            const Vec x = random_vector(m.size(), rng);
            EXPECT_LT((m.apply(inv.apply(x)) - x).norm(), 5.0 * tol);
        }
    }
}

TEST(LambdaInverse, VanishingCouplingGivesIdentity) {
    auto spec = SystemSpec::make(2, {1, 1}, 1e-14);
    const Grid g = Grid::make(2, 6.0, 16);
    LambdaMatrix m(spec, {frame(spec, 0, 1, g, 0.3)}, -1.0);
    LambdaInverse inv(m, 1e-12);
    std::mt19937_64 rng(2);
    const Vec x = random_vector(m.size(), rng);
    EXPECT_LT((m.apply(x) - x).norm(), 1e-13);
    EXPECT_LT((inv.apply(x) - x).norm(), 1e-13);
}

TEST(LambdaInverse, RefusesAboveThresholdUnlessForced) {
    auto spec = SystemSpec::make(2, {1, 1}, 1.0);
    const double z0 = bound_constants(spec).z0;
    const Grid g = Grid::make(2, 6.0, 16);
    LambdaMatrix m(spec, {frame(spec, 0, 1, g, 0.3)}, 0.5 * z0);
    EXPECT_THROW(LambdaInverse(m, 1e-10), AboveThreshold);
    EXPECT_NO_THROW(LambdaInverse(m, 1e-10, true));
}

TEST(LambdaInverse, ReportsDivergingSeries) {
    // Near zero energy the lattice block norm exceeds one.
    auto spec = SystemSpec::make(2, {1, 1}, 4.0);
    const Grid g = Grid::make(2, 6.0, 16);
    LambdaMatrix m(spec, {frame(spec, 0, 1, g, 0.3)}, -0.05);
    EXPECT_THROW(LambdaInverse(m, 1e-10, true), SeriesDiverging);
}

TEST(LambdaMatrix, SelfAdjointAtRealZ) {
    auto spec = SystemSpec::make(3, {1, 2, 1}, 0.7);
    const Grid g = Grid::make(3, 4.0, 8);
    std::vector<std::shared_ptr<const PairFrame>> fr;
    for (const auto& p : enumerate_pairs(spec))
        fr.push_back(std::make_shared<PairFrame>(spec, p, g, BumpProfile::make(), 0.25));
    LambdaMatrix m(spec, fr, -20.0);
    std::mt19937_64 rng(17);
    for (int t = 0; t < 6; ++t) {
        const Vec a = random_vector(m.size(), rng);
        const Vec b = random_vector(m.size(), rng);
        EXPECT_LT(std::abs(a.dot(m.apply(b)) - std::conj(b.dot(m.apply(a)))), 1e-9);
    }
}

TEST(OffDiagonalBlock, AdjointIsReversedBlock) {
    auto spec = SystemSpec::make(3, {1, 2, 0.5}, 1.1);
    const Grid g = Grid::make(3, 4.0, 8);
    auto fa = frame(spec, 0, 1, g, 0.2);
    auto fb = frame(spec, 1, 2, g, 0.2);
    OffDiagonalBlock ab(fa, fb, 1.1, -9.0);
    OffDiagonalBlock ba(fb, fa, 1.1, -9.0);
    std::mt19937_64 rng(6);
    for (int t = 0; t < 4; ++t) {
        const Vec x = random_vector(fb->chi_size(), rng);
        const Vec y = random_vector(fa->chi_size(), rng);
        EXPECT_LT(std::abs(y.dot(ab.apply(x)) - ab.apply_adjoint(y).dot(x)), 1e-12);
        EXPECT_LT(rel(ab.apply_adjoint(y), ba.apply(y)), 1e-12);
    }
}

TEST(OffDiagonalBlock, SameBlockAndClasses) {
    auto spec3 = SystemSpec::make(3, {1, 1, 1}, 1.0);
    auto spec4 = SystemSpec::make(4, {1, 1, 1, 1}, 1.0);
    const auto a = make_pair_index(spec3, 0, 1);
    EXPECT_THROW(overlap_class(a, a), SameBlockRequested);
    EXPECT_EQ(overlap_class(a, make_pair_index(spec3, 0, 2)), OverlapClass::shared_particle);
    EXPECT_EQ(overlap_class(make_pair_index(spec4, 0, 1), make_pair_index(spec4, 2, 3)), OverlapClass::disjoint);
    const Grid g = Grid::make(3, 4.0, 8);
    auto f = frame(spec3, 0, 1, g, 0.0);
    EXPECT_THROW(OffDiagonalBlock(f, f, 1.0, -4.0), SameBlockRequested);
}

TEST(OffDiagonalBlock, KernelConstants) {
    auto spec3 = SystemSpec::make(3, {1, 2, 3}, 0.7);
    EXPECT_NEAR(offdiagonal_kernel_constant(spec3, make_pair_index(spec3, 0, 1), make_pair_index(spec3, 0, 2)),
                -std::pow(2.0, 1.5) * 0.7 * std::sqrt(6.0), 1e-13);
    auto spec4 = SystemSpec::make(4, {1, 2, 3, 4}, 0.7);
    EXPECT_NEAR(offdiagonal_kernel_constant(spec4, make_pair_index(spec4, 0, 1), make_pair_index(spec4, 2, 3)),
                -4.0 * 0.7 * std::sqrt(24.0), 1e-13);
}

TEST(NeumannTerms, GeometricTail) {
    EXPECT_EQ(neumann_terms(0.0, 1e-10), 1);
    // 0.9^k / 0.1 < 1e-12 needs k = 285: the cap wins.
    EXPECT_EQ(neumann_terms(0.9, 1e-12), 200);
    for (double r : {0.1, 0.5, 0.8})
        for (double tol : {1e-6, 1e-12}) {
            const int k = neumann_terms(r, tol);
            EXPECT_LT(std::pow(r, k) / (1.0 - r), tol);
            EXPECT_GE(std::pow(r, k - 1) / (1.0 - r), tol);
        }
}

TEST(BlockConvergence, DiagonalHalvingRatioIsLinear) {
    auto spec = SystemSpec::make(2, {1, 1}, 1.0);
    const auto rep = verify_block_convergence(spec, enumerate_pairs(spec)[0], std::nullopt, -4.0, {0.2, 0.1, 0.05},
                                              BumpProfile::make());
    ASSERT_EQ(rep.rows.size(), 3u);
    EXPECT_TRUE(rep.decreasing);
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
        const double ratio = rep.rows[i].distance / rep.rows[i - 1].distance;
        EXPECT_GE(ratio, 0.4);
        EXPECT_LE(ratio, 0.6);
    }
    ASSERT_TRUE(rep.fitted_order.has_value());
    EXPECT_GE(*rep.fitted_order, 0.9);
    for (const auto& r : rep.rows)
        EXPECT_LE(r.block_norm, r.bound);
}

TEST(BlockConvergence, SingleEpsGivesOneRowAndNoFit) {
    auto spec = SystemSpec::make(2, {1, 1}, 1.0);
    const auto rep =
        verify_block_convergence(spec, enumerate_pairs(spec)[0], std::nullopt, -4.0, {0.1}, BumpProfile::make());
    EXPECT_EQ(rep.rows.size(), 1u);
    EXPECT_FALSE(rep.fitted_order.has_value());
}

TEST(BlockConvergence, OffDiagonalNormsUniformlyBounded) {
    auto spec = SystemSpec::make(3, {1, 1, 1}, 1.0);
    const auto p = enumerate_pairs(spec);
    const auto rep = verify_block_convergence(spec, p[0], p[1], -4.0, {0.4, 0.2}, BumpProfile::make());
    ASSERT_EQ(rep.rows.size(), 2u);
    for (const auto& r : rep.rows) {
        EXPECT_LE(r.block_norm, r.bound);
        EXPECT_NEAR(r.bound, 0.5, 1e-15);
    }
}

TEST(OffDiagonalBlock, LabPathTracksSliceKernel) {
    // The lattice block is a truncated Riemann-sum version of the slice kernel;
    // at L = 8, N = 16 the norms agree to within a few percent.
    auto spec = SystemSpec::make(3, {1, 1, 1}, 1.0);
    const Grid g = Grid::make(3, 8.0, 16);
    const auto p = enumerate_pairs(spec);
    OffDiagonalBlock lab(frame(spec, 0, 1, g, 0.0), frame(spec, 0, 2, g, 0.0), 1.0, -4.0);
    const double lab_norm = operator_norm(lab.map(), 40, 2, 3).value;
    MomentumSliceKernel k(spec, p[0], p[1], -4.0, 0.0, BumpProfile::make());
    EXPECT_GT(lab_norm, 0.8 * k.norm());
    EXPECT_LT(lab_norm, 1.05 * k.norm());
    EXPECT_LE(lab_norm, offdiagonal_norm_bound(spec, -4.0));
}
