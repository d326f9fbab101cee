#pragma once

#include "contact/bump.hpp"
#include "contact/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace contact {

// One audited inequality. PASS iff measured <= claimed + max(2 mc_ci, 1e-6).
struct BoundAudit {
    std::string name;
    std::vector<double> masses; // empty when the bound is mass independent
    std::optional<double> g;
    double z = 0.0;
    std::optional<double> eps;
    double claimed = 0.0;
    double measured = 0.0;
    double margin = 0.0; // claimed - measured
    double mc_ci = 0.0;  // 95% half-width, 0 for deterministic audits
    std::optional<std::uint64_t> seed;
    // Largest relative difference between two independent routes to the
    // measured quantity, where a second route exists.
    std::optional<double> route_gap;
    bool pass = false;

    void finalize();
};

// int_0^inf rho^2 exp(-rho^2 / (2t)) drho by quadrature; the closed form is
// (sqrt(pi)/4) (2t)^{3/2}.
double radial_gaussian_moment(double t);

// Schur integral of the shared-particle kernel after the polar reduction:
//   I(d) = (1/2) int_0^inf exp(-sqrt2 alpha s) / s * rho drho,
//   s = sqrt(rho^2 + d^2/4), alpha = sqrt|z|, d = y - x.
double schur_3d_reduced(double z, double d);
// The same integral before the reduction: the 2D integral over (x', y') of
// G^(3)(x - x', y - x', x - y') at x = 0, y = d (d != 0).
double schur_3d_unreduced(double z, double d);

// sup_d I(d) over a scan, compared with 1 / (2 sqrt(2|z|)).
BoundAudit audit_schur_3d(double z);

struct MonteCarloEstimate {
    double mean = 0.0;
    double ci = 0.0; // 1.96 standard errors of the batch means
    std::int64_t negative_samples = 0;
};

// Disjoint-pair kernel after the reduction to three radial dimensions:
//   J(d) = int d^3rho int_0^inf dt / (8 pi^2 t^2) exp(-(rho^2 + d^2/4)/(2t) + z t).
// Sampled with radial density lambda e^{-lambda rho}, lambda = sqrt(2|z|),
// stratified over the inverse CDF within each batch.
MonteCarloEstimate schur_4d_monte_carlo(double z, double d, std::int64_t samples, int batches, std::uint64_t seed);
// J(d) by nested quadrature over (rho, t), without the Bessel reduction of
// the t-integral.
double schur_4d_quadrature(double z, double d);

BoundAudit audit_schur_4d(double z, std::int64_t samples = 1000000, int batches = 100, std::uint64_t seed = 1);

// int int V(r) V(r') exp(-beta |r - r'|) dr dr'.
double diagonal_majorant(const BumpProfile& bump, double beta);

// The Hoelder-step majorant with beta = 2 eps sqrt(2 mu |z|) for the pair of
// largest reduced mass (claimed 1), and the end-to-end continuum diagonal norm
// over all pairs (claimed c_frak |g| / sqrt|z|).
BoundAudit audit_diagonal_majorant(const SystemSpec& spec, double z, double eps,
                                   const BumpProfile& bump = BumpProfile::make());
BoundAudit audit_diagonal_bound(const SystemSpec& spec, double z, double eps,
                                const BumpProfile& bump = BumpProfile::make());

// J = 2 int int V V (r^2 + r'^2) = 4 int V r^2, claimed below 4 sup r^2.
BoundAudit audit_moment_constant(const BumpProfile& bump = BumpProfile::make());

// sup over Q >= 0 and pairs of ||phi_eps - phi_0|| on the continuum slices,
// claimed eps |g| mu sqrt(J) with mu of the same pair.
BoundAudit audit_convergence_constant(const SystemSpec& spec, double z, double eps,
                                      const BumpProfile& bump = BumpProfile::make());

// Largest of the two Neumann ratios on a z-grid strictly below z0; claimed 1.
BoundAudit audit_threshold(const SystemSpec& spec);

struct AuditSweepOptions {
    std::vector<std::vector<double>> masses{{1, 1, 1}, {1, 2, 0.5}, {3, 1, 2}};
    std::vector<double> couplings{0.5, 1.0, 2.0};
    std::vector<double> z_values{-1.0, -2.0, -8.0};
    std::vector<double> eps_values{0.2, 0.1};
    std::int64_t mc_samples = 1000000;
    int mc_batches = 100;
    std::uint64_t seed = 1;
};

// Every audit across masses x couplings x z. The Schur audits depend on z only
// and are run once per z; Monte Carlo streams are derived from the master seed
// and the z index.
std::vector<BoundAudit> run_audit_sweep(const AuditSweepOptions& opt = {});

bool all_pass(const std::vector<BoundAudit>& audits);

} // namespace contact
