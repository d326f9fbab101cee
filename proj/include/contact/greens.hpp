#pragma once

#include <vector>

namespace contact {

// Kernels of (-Laplacian_d - z)^{-1} on R^d at z = -kappa^2 < 0, as functions
// of the distance |x|.

enum class GreensMethod { closed_form, quadrature };

// Heat-kernel integral int_0^inf (4 pi t)^{-d/2} exp(-x^2/4t + z t) dt after
// t = e^s, by adaptive Gauss-Kronrod; absolute error target 1e-10 relative to
// the value scale. d in 1..4. Throws SingularAtOrigin for d >= 2 and x = 0,
// QuadratureFailure if the error estimate misses the target.
double greens_quadrature(int d, double z, double x);

// d = 1: e^{-kappa|x|}/(2 kappa); d = 3: e^{-kappa x}/(4 pi x);
// d = 4: kappa K_1(kappa x)/(4 pi^2 x).
double greens_closed(int d, double z, double x);

double greens(int d, double z, double x, GreensMethod m = GreensMethod::closed_form);

// Same kernels at a vector argument.
double greens_vec(int d, double z, const std::vector<double>& X);

// Modified Bessel function K_1: power series below 2, the integral
// int_0^inf e^{-x cosh t} cosh t dt by the trapezoid rule up to 25, and the
// Hankel asymptotic series beyond.
double bessel_k1(double x);
// e^x K_1(x), free of underflow for large x.
double bessel_k1_scaled(double x);

} // namespace contact
