#include "contact/errors.hpp"
#include "contact/resolvent.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace contact;

namespace {

Vec random_coeffs(const Grid& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return random_vector(static_cast<Eigen::Index>(g.size()), rng);
}

double rel(const Vec& a, const Vec& b) { return (a - b).norm() / b.norm(); }

} // namespace

TEST(Resolvent, ZeroCouplingIsFreeResolventInEveryMode) {
    const auto spec = SystemSpec::make_free(2, {1, 2});
    const Grid g = Grid::make(2, 6.0, 16);
    const Vec c = random_coeffs(g, 1);
    const Vec want = c.cwiseQuotient((kinetic_symbol(g, spec.masses).array() + 3.0).matrix().cast<cd>());
    for (auto mode : {ResolventMode::direct, ResolventMode::konno_kuroda, ResolventMode::limit, ResolventMode::theta}) {
        ResolventAssembly a(spec, g, BumpProfile::make(), -3.0, mode, 0.3);
        EXPECT_LT((a.apply(c) - want).norm(), 1e-15 * want.norm()) << to_string(mode);
    }
}

TEST(Resolvent, ModeNamesRoundTrip) {
    for (auto mode : {ResolventMode::direct, ResolventMode::konno_kuroda, ResolventMode::limit, ResolventMode::theta})
        EXPECT_EQ(resolvent_mode_from_string(to_string(mode)), mode);
    EXPECT_THROW(resolvent_mode_from_string("lu"), ConfigError);
}

TEST(Resolvent, KonnoKurodaMatchesDenseInverse) {
    const auto spec = SystemSpec::make(2, {1, 1}, 1.0);
    const Grid g = Grid::make(2, 8.0, 32);
    HamiltonianEps h(spec, 0.25, g, BumpProfile::make());
    ResolventOptions opt;
    opt.tol = 1e-12;
    ResolventAssembly kk(spec, g, BumpProfile::make(), -16.0, ResolventMode::konno_kuroda, 0.25, opt);
    for (std::uint64_t s = 0; s < 3; ++s) {
        const Vec c = random_coeffs(g, 10 + s);
        EXPECT_LT(rel(kk.apply(c), solve_dense(h, -16.0, c)), 1e-6);
    }
}

TEST(Resolvent, KonnoKurodaResidualWithinTolerance) {
    const auto spec = SystemSpec::make(3, {1, 1, 2}, 1.0);
    const Grid g = Grid::make(3, 4.0, 8);
    const double z = bound_constants(spec).z0 - 5.0, tol = 1e-10;
    HamiltonianEps h(spec, 0.3, g, BumpProfile::make());
    ResolventOptions opt;
    opt.tol = tol;
    ResolventAssembly kk(spec, g, BumpProfile::make(), z, ResolventMode::konno_kuroda, 0.3, opt);
    const Vec c = random_coeffs(g, 4);
    const Vec x = kk.apply(c);
    const Vec residual = h.apply(x) - z * x - c;
    EXPECT_LT(residual.norm(), 10.0 * tol * c.norm());
}

TEST(Resolvent, DirectAndKonnoKurodaAgree) {
    const auto spec = SystemSpec::make(3, {1, 1, 1}, 1.0);
    const Grid g = Grid::make(3, 4.0, 8);
    ResolventOptions opt;
    opt.tol = 1e-12;
    ResolventAssembly d(spec, g, BumpProfile::make(), -20.0, ResolventMode::direct, 0.25, opt);
    ResolventAssembly kk(spec, g, BumpProfile::make(), -20.0, ResolventMode::konno_kuroda, 0.25, opt);
    const Vec c = random_coeffs(g, 5);
    EXPECT_LT(rel(kk.apply(c), d.apply(c)), 1e-9);
}

TEST(Resolvent, LimitAndThetaAgree) {
    const double tol = 1e-10;
    ResolventOptions opt;
    opt.tol = tol;
    const auto spec2 = SystemSpec::make(2, {1, 1}, 1.0);
    const Grid g2 = Grid::make(2, 8.0, 32);
    const auto spec3 = SystemSpec::make(3, {1, 1, 1}, 1.0);
    const Grid g3 = Grid::make(3, 4.0, 8);
    for (auto [spec, g] : {std::pair{spec2, g2}, std::pair{spec3, g3}}) {
        ResolventAssembly lim(spec, g, BumpProfile::make(), -20.0, ResolventMode::limit, 0.0, opt);
        ResolventAssembly th(spec, g, BumpProfile::make(), -20.0, ResolventMode::theta, 0.0, opt);
        for (std::uint64_t s = 0; s < 3; ++s) {
            const Vec c = random_coeffs(g, 20 + s);
            EXPECT_LT((lim.apply(c) - th.apply(c)).norm(), 5.0 * tol * c.norm()) << "n=" << spec.n;
        }
    }
}

TEST(Resolvent, LimitEqualsDirectContactOperator) {
    // The eps = 0 Hamiltonian on the grid is the contact operator itself.
    const auto spec = SystemSpec::make(2, {1, 2}, 1.0);
    const Grid g = Grid::make(2, 8.0, 16);
    ResolventOptions opt;
    opt.tol = 1e-12;
    const double z = bound_constants(spec).z0 - 5.0;
    ResolventAssembly lim(spec, g, BumpProfile::make(), z, ResolventMode::limit, 0.0, opt);
    HamiltonianEps h0(spec, 0.0, g, BumpProfile::make());
    const Vec c = random_coeffs(g, 2);
    EXPECT_LT(rel(lim.apply(c), solve_dense(h0, z, c)), 1e-9);
}

TEST(Resolvent, SymmetricAtRealZ) {
    const auto spec = SystemSpec::make(3, {1, 2, 1}, 1.0);
    const Grid g = Grid::make(3, 4.0, 8);
    const double z = bound_constants(spec).z0 - 2.0;
    for (auto mode : {ResolventMode::konno_kuroda, ResolventMode::limit, ResolventMode::theta}) {
        ResolventAssembly a(spec, g, BumpProfile::make(), z, mode, 0.2);
        const Vec u = random_coeffs(g, 7), v = random_coeffs(g, 8);
        EXPECT_LT(std::abs(u.dot(a.apply(v)) - std::conj(v.dot(a.apply(u)))), 1e-9) << to_string(mode);
    }
}

TEST(Resolvent, FirstResolventIdentityForLimit) {
    const auto spec = SystemSpec::make(3, {1, 1, 1}, 1.0);
    const Grid g = Grid::make(3, 4.0, 8);
    ResolventOptions opt;
    opt.tol = 1e-11;
    const double z1 = -20.0, z2 = -30.0;
    ResolventAssembly r1(spec, g, BumpProfile::make(), z1, ResolventMode::limit, 0.0, opt);
    ResolventAssembly r2(spec, g, BumpProfile::make(), z2, ResolventMode::limit, 0.0, opt);
    const Vec c = random_coeffs(g, 3);
    const Vec lhs = r1.apply(c) - r2.apply(c);
    const Vec rhs = (z1 - z2) * r1.apply(r2.apply(c));
    EXPECT_LT((lhs - rhs).norm(), 1e-9 * c.norm());
}

TEST(Resolvent, RefusesAboveThreshold) {
    const auto spec = SystemSpec::make(2, {1, 1}, 1.0);
    const Grid g = Grid::make(2, 8.0, 16);
    const double z = 0.5 * bound_constants(spec).z0;
    EXPECT_THROW(ResolventAssembly(spec, g, BumpProfile::make(), z, ResolventMode::limit), AboveThreshold);
    EXPECT_THROW(ResolventAssembly(spec, g, BumpProfile::make(), z, ResolventMode::theta), AboveThreshold);
    ResolventOptions forced;
    forced.force = true;
    EXPECT_NO_THROW(ResolventAssembly(spec, g, BumpProfile::make(), z, ResolventMode::theta, 0.0, forced));
    EXPECT_THROW(ResolventAssembly(spec, g, BumpProfile::make(), 1.0, ResolventMode::direct, 0.3), ConfigError);
    EXPECT_THROW(ResolventAssembly(spec, Grid::make(3, 8.0, 8), BumpProfile::make(), -9.0, ResolventMode::direct),
                 DimensionMismatch);
}

TEST(Theta, SelfAdjointAtRealZ) {
    const auto spec = SystemSpec::make(3, {1, 2, 1.5}, 1.0);
    const Grid g = Grid::make(3, 4.0, 8);
    std::vector<std::shared_ptr<const PairFrame>> fr;
    for (const auto& p : enumerate_pairs(spec))
        fr.push_back(std::make_shared<PairFrame>(spec, p, g, BumpProfile::make(), 0.0));
    ThetaMatrix t(spec, fr, -20.0);
    std::mt19937_64 rng(9);
    for (int k = 0; k < 4; ++k) {
        const Vec a = random_vector(t.size(), rng);
        EXPECT_LT((t.apply(a) - t.apply_adjoint(a)).norm(), 1e-9);
        const Vec b = random_vector(t.size(), rng);
        EXPECT_LT(std::abs(a.dot(t.apply(b)) - std::conj(b.dot(t.apply(a)))), 1e-9);
    }
}

TEST(Theta, TwoBodySliceMatchesContinuumMultiplier) {
    // At large L and N the lattice sum tends to sqrt(mu/2)/sqrt|z|, so
    // Theta = 1 - (1/2)/sqrt|z| for unit masses and g = 1.
    const auto spec = SystemSpec::make(2, {1, 1}, 1.0);
    for (double z : {-0.25, -1.0, -4.0}) {
        const double want = 1.0 - 0.5 / std::sqrt(-z);
        EXPECT_NEAR(theta_zero_slice(spec, 200.0, 1 << 16, z), want, 2e-3);
    }
}

TEST(Theta, ZeroCrossingIsTheTwoBodyBoundState) {
    const auto spec = SystemSpec::make(2, {1, 1}, 1.0);
    const auto zc = theta_zero_crossing(spec, 64.0, 4096);
    EXPECT_NEAR(zc.extrapolated, -0.25, 0.02 * 0.25);
    EXPECT_GT(zc.z_coarse, zc.z_fine); // a finer grid binds more
    EXPECT_NEAR(theta_zero_slice(spec, 64.0, 4096, zc.z_coarse), 0.0, 1e-12);
    EXPECT_THROW(theta_zero_crossing(SystemSpec::make(2, {1, 1}, -1.0), 64.0, 64), ConfigError);
    EXPECT_THROW(theta_zero_slice(SystemSpec::make(3, {1, 1, 1}, 1.0), 8.0, 8, -1.0), DimensionMismatch);
}

TEST(Resolvent, LargestEigenvalueBelowTwoBodyPoleBound) {
    // The lattice limit binds less than the continuum: spec(R(z)) <= 1/(E0 - z)
    // with E0 = -mu g^2 / 2 = -0.25.
    const auto spec = SystemSpec::make(2, {1, 1}, 1.0);
    const Grid g = Grid::make(2, 32.0, 64);
    const double z = -4.0;
    ResolventAssembly r(spec, g, BumpProfile::make(), z, ResolventMode::theta);
    std::mt19937_64 rng(1);
    const Vec start = random_vector(static_cast<Eigen::Index>(g.size()), rng);
    const auto top = lanczos_largest([&](const Vec& c) { return r.apply(c); }, start, 1, 1e-10);
    EXPECT_LE(top[0], 1.0 / (-0.25 - z));
    EXPECT_GT(top[0], 1.0 / (0.0 - z)); // a bound state exists below zero
}

TEST(Resolvent, ComplexShiftMatchesNeumannExpansion) {
    // R(z + i d) = sum_k (i d)^k R(z)^{k+1} for d < dist(z, spectrum); the
    // direct solve at z +- i d is compared with the series built from the
    // real-z assembly.
    const auto spec = SystemSpec::make(2, {1, 1}, 1.0);
    const Grid g = Grid::make(2, 8.0, 32);
    const double z = -16.0, eps = 0.25;
    ResolventOptions opt;
    opt.tol = 1e-12;
    ResolventAssembly kk(spec, g, BumpProfile::make(), z, ResolventMode::konno_kuroda, eps, opt);
    HamiltonianEps h(spec, eps, g, BumpProfile::make());
    const Vec c = random_coeffs(g, 6);
    for (double d : {1.0, -1.0}) {
        Vec term = kk.apply(c);
        Vec sum = term;
        for (int k = 1; k < 40; ++k) {
            term = cd(0.0, d) * kk.apply(term);
            sum += term;
        }
        const Vec direct = solve_shifted_spectral(h, cd(z, d), c, 1e-12);
        EXPECT_LT(rel(sum, direct), 1e-9);
    }
}

TEST(ConvergenceSweep, TwoBodyDistancesDecreaseLinearly) {
    const auto spec = SystemSpec::make(2, {1, 1}, 1.0);
    SweepOptions opt;
    opt.iterations = 30;
    opt.restarts = 2;
    const auto rep = convergence_sweep(spec, {-20.0}, {0.4, 0.2, 0.1, 0.05}, {Grid::make(2, 8.0, 32)},
                                       BumpProfile::make(), opt);
    ASSERT_EQ(rep.rows.size(), 4u);
    ASSERT_EQ(rep.series.size(), 1u);
    EXPECT_TRUE(rep.all_decreasing());
    ASSERT_TRUE(rep.series[0].fitted_order.has_value());
    EXPECT_GE(*rep.series[0].fitted_order, 0.9);
}

TEST(ConvergenceSweep, ZeroCouplingRowsVanish) {
    const auto spec = SystemSpec::make_free(2, {1, 1});
    SweepOptions opt;
    opt.iterations = 5;
    opt.restarts = 1;
    const auto rep =
        convergence_sweep(spec, {-5.0}, {0.4, 0.2}, {Grid::make(2, 8.0, 16)}, BumpProfile::make(), opt);
    for (const auto& r : rep.rows)
        EXPECT_LT(r.distance, opt.tol);
}

TEST(ConvergenceSweep, RejectsIncreasingEpsList) {
    const auto spec = SystemSpec::make(2, {1, 1}, 1.0);
    EXPECT_THROW(convergence_sweep(spec, {-20.0}, {0.1, 0.2}, {Grid::make(2, 8.0, 16)}), ConfigError);
}
