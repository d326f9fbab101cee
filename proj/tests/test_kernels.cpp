#include "contact/errors.hpp"
#include "contact/kernels.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace contact;

TEST(GaussLegendre, ExactOnPolynomialsUpToDegree2nMinus1) {
    for (int n : {1, 2, 5, 12, 33}) {
        std::vector<double> x, w;
        gauss_legendre(n, x, w);
        ASSERT_EQ(static_cast<int>(x.size()), n);
        for (std::size_t k = 1; k < x.size(); ++k)
            EXPECT_LT(x[k - 1], x[k]);
        for (int deg = 0; deg <= 2 * n - 1; ++deg) {
            double s = 0.0;
            for (int k = 0; k < n; ++k)
                s += w[k] * std::pow(x[k], deg);
            const double exact = deg % 2 == 1 ? 0.0 : 2.0 / (deg + 1);
            EXPECT_NEAR(s, exact, 1e-13) << "n=" << n << " deg=" << deg;
        }
    }
}

TEST(GaussLegendre, RejectsEmptyRule) {
    std::vector<double> x, w;
    EXPECT_THROW(gauss_legendre(0, x, w), ConfigError);
}

namespace {

// Top singular value of the eps = 0 shared-particle kernel at K = 0 by a plain
// truncated trapezoid in (p_b, p_c) on [-Q, Q]: -(g / 2 pi) / (E - z),
// E = (p_b^2 + p_c^2 + (p_b + p_c)^2) / 2 for unit masses.
double trapezoid_top_singular(double g, double z, double Q, int n) {
    const double h = 2.0 * Q / (n - 1);
    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double a = -Q + i * h, b = -Q + j * h;
            const double E = 0.5 * (a * a + b * b + (a + b) * (a + b));
            K(i, j) = h * (-g / (2.0 * std::numbers::pi)) / (E - z);
        }
    // K is symmetric; its norm is the largest |eigenvalue|.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

} // namespace

TEST(MomentumSliceKernel, LimitNormMatchesIndependentNystrom) {
    auto spec = SystemSpec::make(3, {1, 1, 1}, 1.0);
    const auto p = enumerate_pairs(spec);
    MomentumSliceKernel k(spec, p[0], p[1], -4.0, 0.0, BumpProfile::make());
    const double momentum_part = k.norm() / k.nodes().v_norm_sq();
    // The truncated tail of the trapezoid oracle is O(1/Q).
    const double oracle = trapezoid_top_singular(1.0, -4.0, 200.0, 801);
    EXPECT_NEAR(momentum_part, oracle, 2e-3 * oracle);
}

TEST(MomentumSliceKernel, ConvergedInQuadratureNodes) {
    auto spec = SystemSpec::make(3, {1, 2, 0.7}, 1.3);
    const auto p = enumerate_pairs(spec);
    SliceKernelOptions lo, hi;
    lo.q_nodes = 64;
    hi.q_nodes = 128;
    MomentumSliceKernel a(spec, p[0], p[2], -5.0, 0.0, BumpProfile::make(), {0.0, 0.0}, lo);
    MomentumSliceKernel b(spec, p[0], p[2], -5.0, 0.0, BumpProfile::make(), {0.0, 0.0}, hi);
    EXPECT_NEAR(a.norm(), b.norm(), 1e-8 * b.norm());
}

TEST(MomentumSliceKernel, AdjointConsistency) {
    auto spec = SystemSpec::make(4, {1, 1.5, 2, 0.5}, 0.9);
    SliceKernelOptions opt;
    opt.q_nodes = 16;
    opt.r_nodes = 24;
    MomentumSliceKernel k(spec, make_pair_index(spec, 0, 1), make_pair_index(spec, 2, 3), -3.0, 0.3,
                          BumpProfile::make(), {0.4, -0.2}, opt);
    std::mt19937_64 rng(12);
    for (int t = 0; t < 5; ++t) {
        const Vec x = random_vector(k.size(), rng);
        const Vec y = random_vector(k.size(), rng);
        EXPECT_LT(std::abs(y.dot(k.apply(x)) - k.apply_adjoint(y).dot(x)), 1e-13);
    }
}

TEST(MomentumSliceKernel, EpsilonPathReducesToLimitPath) {
    auto spec = SystemSpec::make(3, {1, 1, 1}, 1.0);
    const auto p = enumerate_pairs(spec);
    SliceKernelOptions opt;
    opt.q_nodes = 20;
    opt.r_nodes = 32;
    MomentumSliceKernel k0(spec, p[0], p[1], -4.0, 0.0, BumpProfile::make(), {0.3, 0.0}, opt);
    MomentumSliceKernel kt(spec, p[0], p[1], -4.0, 1e-12, BumpProfile::make(), {0.3, 0.0}, opt);
    std::mt19937_64 rng(4);
    const Vec x = random_vector(k0.size(), rng);
    EXPECT_LT((k0.apply(x) - kt.apply(x)).norm(), 1e-9);
    EXPECT_LT((k0.apply_adjoint(x) - kt.apply_adjoint(x)).norm(), 1e-9);
}

TEST(MomentumSliceKernel, MatchesElementwiseKernel) {
    // Dense kernel built from the definition: output (q_i, r_a), input (q_j, r_b),
    // disjoint pairs with conserved P_sigma and P_nu.
    auto spec = SystemSpec::make(4, {1, 2, 1, 3}, 0.8);
    const auto s = make_pair_index(spec, 0, 1);
    const auto n = make_pair_index(spec, 2, 3);
    const double z = -2.5, eps = 0.35, Ps = 0.6, Pn = -1.1;
    SliceKernelOptions opt;
    opt.q_nodes = 10;
    opt.r_nodes = 16;
    MomentumSliceKernel k(spec, s, n, z, eps, BumpProfile::make(), {Ps, Pn}, opt);

    std::vector<double> t, wt;
    gauss_legendre(opt.q_nodes, t, wt);
    const double c = std::sqrt(2.0 * 3.0 * std::abs(z));
    std::vector<double> q, wq;
    for (std::size_t a = 0; a < t.size(); ++a) {
        const double th = 0.5 * std::numbers::pi * t[a];
        q.push_back(c * std::tan(th));
        wq.push_back(c * 0.5 * std::numbers::pi * wt[a] / (std::cos(th) * std::cos(th)));
    }
    const auto& nodes = k.nodes();
    const int M = nodes.size(), nq = static_cast<int>(q.size());
    Eigen::MatrixXcd K(nq * M, nq * M);
    for (int i = 0; i < nq; ++i)
        for (int j = 0; j < nq; ++j) {
            const double p0 = q[j], p1 = Ps - q[j], p3 = q[i], p2 = Pn - q[i];
            const double E = p0 * p0 / 2.0 + p1 * p1 / 4.0 + p2 * p2 / 2.0 + p3 * p3 / 6.0;
            const double ks = (2.0 * p0 - 1.0 * p1) / 3.0;
            const double kn = (3.0 * p2 - 1.0 * p3) / 4.0;
            for (int a = 0; a < M; ++a)
                for (int b = 0; b < M; ++b)
                    K(i * M + a, j * M + b) = std::sqrt(wq[i] * wq[j]) * (-0.8 / (2.0 * std::numbers::pi)) /
                                              (E - z) * nodes.sqrt_wv[a] * nodes.sqrt_wv[b] *
                                              std::polar(1.0, eps * (ks * nodes.r[a] - kn * nodes.r[b]));
        }
    std::mt19937_64 rng(30);
    const Vec x = random_vector(k.size(), rng);
    EXPECT_LT((k.apply(x) - K * x).norm(), 1e-12 * (K * x).norm());
    EXPECT_LT((k.apply_adjoint(x) - K.adjoint() * x).norm(), 1e-12 * (K * x).norm());
}

TEST(MomentumSliceKernel, NormsBelowOffDiagonalBound) {
    auto spec3 = SystemSpec::make(3, {1, 1, 1}, 1.0);
    auto p3 = enumerate_pairs(spec3);
    auto spec4 = SystemSpec::make(4, {1, 1, 1, 1}, 1.0);
    SliceKernelOptions opt;
    opt.q_nodes = 48;
    for (double eps : {0.0, 0.2}) {
        MomentumSliceKernel a(spec3, p3[0], p3[2], -4.0, eps, BumpProfile::make(), {0.0, 0.0}, opt);
        EXPECT_LE(a.norm(), offdiagonal_norm_bound(spec3, -4.0));
        MomentumSliceKernel b(spec4, make_pair_index(spec4, 0, 1), make_pair_index(spec4, 2, 3), -4.0, eps,
                              BumpProfile::make(), {0.0, 0.0}, opt);
        EXPECT_LE(b.norm(), offdiagonal_norm_bound(spec4, -4.0));
    }
}

TEST(MomentumSliceKernel, RejectsUnsupportedGeometries) {
    auto spec4 = SystemSpec::make(4, {1, 1, 1, 1}, 1.0);
    EXPECT_THROW(MomentumSliceKernel(spec4, make_pair_index(spec4, 0, 1), make_pair_index(spec4, 0, 2), -1.0, 0.0,
                                     BumpProfile::make()),
                 DimensionMismatch);
    auto spec3 = SystemSpec::make(3, {1, 1, 1}, 1.0);
    EXPECT_THROW(MomentumSliceKernel(spec3, make_pair_index(spec3, 0, 1), make_pair_index(spec3, 0, 1), -1.0, 0.0,
                                     BumpProfile::make()),
                 SameBlockRequested);
    EXPECT_THROW(MomentumSliceKernel(spec3, make_pair_index(spec3, 0, 1), make_pair_index(spec3, 0, 2), 1.0, 0.0,
                                     BumpProfile::make()),
                 ConfigError);
}
