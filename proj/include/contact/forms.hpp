#pragma once

#include "contact/bump.hpp"
#include "contact/grid.hpp"
#include "contact/model.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace contact {

// Grid of the collision hyperplane x_i = x_j of a lab grid: coordinates
// (R, spectators) with R the pair's centre of mass, box L and 2N points per
// axis so that every total momentum P = p_i + p_j is representable.
Grid reduced_grid(const Grid& lab);

// Orthonormal Fourier coefficients of the trace on reduced_grid(lab).
// Coefficient (P, q) is L^{-1/2} sum of c_p over lab modes with p_i + p_j = P
// and spectator momenta q, the same numbers PairFrame::trace produces.
Vec trace_coefficients(const Grid& lab, const Vec& c, const SystemSpec& spec, const PairIndex& sigma);

// tau_sigma psi: psi restricted to x_i = x_j as a field of (R, spectators).
// Exact for band-limited psi.
GridField apply_trace(const GridField& psi, const SystemSpec& spec, const PairIndex& sigma);

// sum_p (1 + |p|^2) |c_p|^2 with the full lab momentum.
double h1_norm_sq(const GridField& psi);
// sum_p (1 + k^2) |c_p|^2 with k the relative momentum of the pair: the
// L2 + ||d_r psi||^2 norm in pair coordinates.
double relative_h1_norm_sq(const GridField& psi, const SystemSpec& spec, const PairIndex& sigma);

struct TraceBoundCheck {
    double trace_sq = 0.0;    // ||tau psi||^2
    double relative_sq = 0.0; // ||psi||^2 + ||d_r psi||^2
    double h1_sq = 0.0;       // ||psi||^2_{H^1}
    // ||tau psi||^2 <= relative_sq <= h1_sq, each up to a relative 1e-12.
    bool pass() const;
};

// The lattice version of the trace inequality holds for L >= 2, where
// (1/L) sum_k 1/(1 + k^2) <= 1/L + 1/2 <= 1.
TraceBoundCheck check_trace_bound(const GridField& psi, const SystemSpec& spec, const PairIndex& sigma);

// Continuum-normalized DFT over a subset of axes:
// (F f)(p) = (2 pi)^{-m/2} sum_x h^m f(x) e^{-i p x}, m = axes.size().
Vec continuum_dft(const Grid& g, const Vec& values, const std::vector<int>& axes);

// The hyperplane r = 0 of a field on a product grid (r, Y), r on axis 0 at
// index 0: tau_0 xi = xi(0, Y). The Fourier trace is the momentum sum
// (hat tau_0 eta)(Y) = (2 pi)^{-1/2} sum_p dp eta(p, Y).
Vec slice_at_origin(const Grid& g, const Vec& values);
Vec fourier_trace(const Grid& g, const Vec& values);

// Relative residuals of
//   1: F tau_0 = tau_0 (1 (x) F)
//   2: F tau_0 = hat tau_0 F
//   3: tau_0 = hat tau_0 (F_r (x) 1)
// for a field on a grid of dimension >= 2.
struct FourierTraceReport {
    double residual[3] = {0.0, 0.0, 0.0};
    double worst() const;
};

FourierTraceReport fourier_trace_identities(const GridField& xi);

// t(phi, psi) = sum_j a_j <d_j phi, d_j psi> - g sum_sigma <tau phi, tau psi>,
// a_j = 1/(2 m_j); conjugate-linear in phi.
cd evaluate_form(const GridField& phi, const GridField& psi, const SystemSpec& spec);
inline double form_value(const GridField& psi, const SystemSpec& spec) {
    return evaluate_form(psi, psi, spec).real();
}

// <psi, H_eps psi> at eps and eps / 2 and the Richardson value
// (4 f(eps/2) - f(eps)) / 3, which removes the eps^2 term of an even bump.
struct FormOperatorCheck {
    double form = 0.0;
    double at_eps = 0.0;
    double at_half = 0.0;
    double extrapolated = 0.0;
    double relative_gap() const;
};

FormOperatorCheck form_vs_operator(const GridField& psi, const SystemSpec& spec, double eps,
                                   const BumpProfile& bump = BumpProfile::make());

// Random field with complex Gaussian coefficients on modes |m_k| < band in
// every axis, damped by (1 + |p|^2)^{-1}; zero elsewhere. Unit norm.
GridField random_band_limited(const Grid& g, int band, std::mt19937_64& rng);

// The full trace and form suite on one configuration.
struct FormSuiteOptions {
    int trace_fields = 100;
    int positivity_fields = 200;
    int hermiticity_pairs = 50;
    double eps = 0.05; // form-vs-operator regularization
    std::uint64_t seed = 1;
};

struct FormCheckRow {
    std::string name;
    double measured = 0.0;  // worst value over the sample
    double threshold = 0.0; // contract
    bool pass = false;
};

struct FormSuiteReport {
    std::vector<FormCheckRow> rows;
    bool all_pass() const;
};

// Trace bound over random band-limited fields (every pair), the three Fourier
// trace identities on a Gaussian product field and a random field, form
// hermiticity, positivity of q_t for -|g|, the lower-bound witness
// q_t >= -mu g^2/2 ||psi||^2 for n = 2 and g > 0, and form-vs-operator
// consistency on a smooth n = 2 field.
FormSuiteReport run_form_suite(const SystemSpec& spec, const Grid& grid, const FormSuiteOptions& opt = {});

} // namespace contact
