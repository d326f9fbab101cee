#include "contact/errors.hpp"
#include "contact/greens.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace contact;
using std::numbers::pi;

TEST(Greens, OneDimensionalValues) {
    EXPECT_NEAR(greens_quadrature(1, -1.0, 0.0), 0.5, 1e-10);
    EXPECT_NEAR(greens_quadrature(1, -1.0, 2.0), std::exp(-2.0) / 2, 1e-10);
    EXPECT_NEAR(greens_closed(1, -1.0, 2.0), 0.0676676416, 1e-9);
}

TEST(Greens, ThreeDimensionalValue) {
    EXPECT_NEAR(greens_quadrature(3, -1.0, 1.0), std::exp(-1.0) / (4 * pi), 1e-10);
    EXPECT_NEAR(greens_closed(3, -1.0, 1.0), 0.0292749, 1e-7);
}

TEST(Greens, FourDimensionalValue) {
    const double oracle = boost::math::cyl_bessel_k(1, 1.0) / (4 * pi * pi);
    EXPECT_NEAR(greens_quadrature(4, -1.0, 1.0), oracle, 1e-10);
    EXPECT_NEAR(greens_closed(4, -1.0, 1.0), oracle, 1e-14);
    EXPECT_NEAR(oracle, 0.0152465, 1e-7);
}

TEST(BesselK1, MatchesReferenceAcrossRegimes) {
    for (double x = 1e-3; x < 80.0; x *= 1.37) {
        const double ref = boost::math::cyl_bessel_k(1, x);
        ASSERT_NEAR(bessel_k1(x), ref, 1e-12 * ref) << "x = " << x;
        ASSERT_NEAR(bessel_k1_scaled(x), std::exp(x) * ref, 1e-12 * std::exp(x) * ref);
    }
    EXPECT_THROW(bessel_k1(0.0), SingularAtOrigin);
}

TEST(Greens, QuadratureMatchesClosedFormOnLattice) {
    for (int d : {1, 3, 4}) {
        int count = 0;
        for (double z : {-0.25, -1.0, -4.0, -9.0})
            for (double x : {0.05, 0.3, 1.0, 2.5, 6.0}) {
                const double c = greens_closed(d, z, x), q = greens_quadrature(d, z, x);
                EXPECT_NEAR(q, c, 1e-8 * c) << "d=" << d << " z=" << z << " x=" << x;
                ++count;
            }
        EXPECT_EQ(count, 20);
    }
}

TEST(Greens, WeakFundamentalSolutionIdentity) {
    // int G (-phi'' - z phi) = phi(0) for phi(x) = exp(-(x-0.3)^2).
    const double z = -1.7;
    auto phi = [](double x) { return std::exp(-(x - 0.3) * (x - 0.3)); };
    auto lap = [&](double x) {
        const double u = x - 0.3;
        return (4 * u * u - 2) * phi(x);
    };
    auto f = [&](double x) { return greens_closed(1, z, x) * (-lap(x) - z * phi(x)); };
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    const double val = GK::integrate(f, -30.0, 0.0, 20, 1e-14) + GK::integrate(f, 0.0, 30.0, 20, 1e-14);
    EXPECT_NEAR(val, phi(0.0), 1e-8);
}

TEST(Greens, ScalingLaw) {
    const double lam = 2.0, z = -1.3;
    for (double x : {0.2, 1.0, 3.0})
        EXPECT_NEAR(greens_closed(3, lam * lam * z, x), lam * greens_closed(3, z, lam * x), 1e-14);
}

TEST(Greens, PositiveDecreasingAndMonotoneInZ) {
    for (int d : {1, 3, 4}) {
        double prev = 1e300;
        for (double x = 0.1; x < 8.0; x += 0.3) {
            const double v = greens_closed(d, -1.0, x);
            EXPECT_GT(v, 0.0);
            EXPECT_LT(v, prev);
            prev = v;
        }
        for (double x : {0.5, 2.0})
            EXPECT_LT(greens_closed(d, -3.0, x), greens_closed(d, -2.0, x));
    }
}

TEST(Greens, SingularityAndDomainErrors) {
    EXPECT_THROW(greens_quadrature(3, -1.0, 0.0), SingularAtOrigin);
    EXPECT_THROW(greens_closed(4, -1.0, 0.0), SingularAtOrigin);
    EXPECT_THROW(greens_closed(2, -1.0, 1.0), DimensionMismatch);
    EXPECT_THROW(greens_closed(1, 1.0, 1.0), ConfigError);
}

TEST(Greens, TwoDimensionalQuadratureSmoke) {
    const double ref = boost::math::cyl_bessel_k(0, 1.5) / (2 * pi);
    EXPECT_NEAR(greens_quadrature(2, -1.0, 1.5), ref, 1e-8 * ref);
}
