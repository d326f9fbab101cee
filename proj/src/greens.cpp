#include "contact/greens.hpp"

#include "contact/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

namespace contact {

namespace {

constexpr double pi = std::numbers::pi;

void check_z(double z) {
    if (!(z < 0.0) || !std::isfinite(z))
        throw ConfigError("Green's functions need a finite z < 0");
}

// Power series, accurate for x <= 2.
double k1_series(double x) {
    const double y = 0.25 * x * x;
    const double gamma = 0.57721566490153286061;
    double term = 1.0; // y^k / (k! (k+1)!)
    double i1 = 0.0, rest = 0.0;
    double hk = 0.0; // harmonic number H_k
    for (int k = 0; k < 60; ++k) {
        if (k > 0) {
            term *= y / (static_cast<double>(k) * (k + 1));
            hk += 1.0 / k;
        }
        const double psi_sum = (-gamma + hk) + (-gamma + hk + 1.0 / (k + 1));
        i1 += term;
        rest += psi_sum * term;
        if (term < 1e-18 * i1)
            break;
    }
    i1 *= 0.5 * x;
    return 1.0 / x + i1 * std::log(0.5 * x) - 0.25 * x * rest;
}

// e^x K_1(x) = int_0^inf e^{-x (cosh t - 1)} cosh t dt; the trapezoid rule is
// geometrically convergent for this analytic, rapidly decaying integrand.
double k1_scaled_integral(double x) {
    const double h = 0.05;
    double sum = 0.5;
    for (int i = 1;; ++i) {
        const double t = i * h;
        const double f = std::exp(-x * (std::cosh(t) - 1.0)) * std::cosh(t);
        sum += f;
        if (f < 1e-18 * sum)
            break;
    }
    return sum * h;
}

// Hankel expansion sqrt(pi/2x) sum_k a_k(1)/x^k, mu = 4.
double k1_scaled_asymptotic(double x) {
    const double mu = 4.0;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 40; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = term * (mu - odd * odd) / (k * 8.0 * x);
        if (std::abs(next) > std::abs(term))
            break;
        term = next;
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum))
            break;
    }
    return std::sqrt(pi / (2.0 * x)) * sum;
}

} // namespace

double bessel_k1_scaled(double x) {
    if (!(x > 0.0))
        throw SingularAtOrigin("K_1 is singular at 0");
    if (x <= 2.0)
        return std::exp(x) * k1_series(x);
    if (x <= 25.0)
        return k1_scaled_integral(x);
    return k1_scaled_asymptotic(x);
}

double bessel_k1(double x) {
    if (!(x > 0.0))
        throw SingularAtOrigin("K_1 is singular at 0");
    if (x <= 2.0)
        return k1_series(x);
    return std::exp(-x) * bessel_k1_scaled(x);
}

double greens_closed(int d, double z, double x) {
    check_z(z);
    const double k = std::sqrt(-z);
    x = std::abs(x);
    switch (d) {
    case 1:
        return std::exp(-k * x) / (2.0 * k);
    case 3:
        if (x == 0.0)
            throw SingularAtOrigin("G^(3) is singular at x = 0");
        return std::exp(-k * x) / (4.0 * pi * x);
    case 4:
        if (x == 0.0)
            throw SingularAtOrigin("G^(4) is singular at x = 0");
        return k * bessel_k1(k * x) / (4.0 * pi * pi * x);
    default:
        throw DimensionMismatch("closed form available for d in {1, 3, 4} only, got d = " + std::to_string(d));
    }
}

double greens_quadrature(int d, double z, double x) {
    check_z(z);
    if (d < 1 || d > 4)
        throw DimensionMismatch("Green's function dimension must be 1..4");
    x = std::abs(x);
    if (d >= 2 && x == 0.0)
        throw SingularAtOrigin("G^(" + std::to_string(d) + ") is singular at x = 0");
    const double half_d = 0.5 * d;
    // log of the integrand in s = log t, including the Jacobian e^s.
    auto log_f = [&](double s) {
        return -half_d * std::log(4.0 * pi) + (1.0 - half_d) * s - 0.25 * x * x * std::exp(-s) + z * std::exp(s);
    };
    // Locate the peak by bisection on the derivative, then walk out to the
    // points where the integrand is 1e-40 of the peak.
    auto dlog = [&](double s) { return (1.0 - half_d) + 0.25 * x * x * std::exp(-s) + z * std::exp(s); };
    double lo = -60.0, hi = 60.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (dlog(mid) > 0.0 ? lo : hi) = mid;
    }
    const double peak = 0.5 * (lo + hi);
    const double fpeak = log_f(peak);
    const double drop = 92.0; // e^-92 ~ 1e-40
    double a = peak, b = peak;
    while (log_f(a) > fpeak - drop && a > peak - 400.0)
        a -= 0.5;
    while (log_f(b) > fpeak - drop && b < peak + 400.0)
        b += 0.5;
    double err = 0.0;
    auto f = [&](double s) { return std::exp(log_f(s)); };
    const double val =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-14, &err);
    if (!(err <= 1e-10 * std::max(1.0, std::abs(val))))
        throw QuadratureFailure("heat-kernel integral error estimate " + std::to_string(err) + " misses target");
    return val;
}

double greens(int d, double z, double x, GreensMethod m) {
    return m == GreensMethod::closed_form ? greens_closed(d, z, x) : greens_quadrature(d, z, x);
}

double greens_vec(int d, double z, const std::vector<double>& X) {
    double s = 0.0;
    for (double c : X)
        s += c * c;
    return greens_closed(d, z, std::sqrt(s));
}

} // namespace contact
