#pragma once

#include "contact/bump.hpp"
#include "contact/grid.hpp"
#include "contact/hamiltonian.hpp"
#include "contact/lambda.hpp"
#include "contact/model.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace contact {

// direct: Krylov solve with H_eps.
// konno_kuroda: R_0 + g (A R_0)^* Lambda_eps^{-1} (A R_0).
// limit: the same with A_0 = v (x) tau and Lambda_0.
// theta: R_0 + g G^* Theta^{-1} G on the reduced spaces, G = tau R_0.
enum class ResolventMode { direct, konno_kuroda, limit, theta };

std::string to_string(ResolventMode m);
ResolventMode resolvent_mode_from_string(const std::string& s);

struct ResolventOptions {
    double tol = 1e-10; // inner solves and series truncation
    bool force = false; // allow z >= z0 for the assembled modes
};

// R(z) in one of the four modes at a real spectral point, on the spectral
// coefficients of one lab grid. Assembled modes refuse z >= z0 unless forced.
class ResolventAssembly {
public:
    ResolventAssembly(const SystemSpec& spec, const Grid& grid, const BumpProfile& bump, double z, ResolventMode mode,
                      double eps = 0.0, const ResolventOptions& opt = {});
    ResolventAssembly(const ResolventAssembly&) = delete;
    ResolventAssembly& operator=(const ResolventAssembly&) = delete;
    ~ResolventAssembly();

    ResolventMode mode() const { return mode_; }
    double z() const { return z_; }
    double eps() const { return eps_; }
    const Grid& grid() const { return grid_; }

    Vec apply(const Vec& c) const;
    GridField apply(const GridField& psi) const;
    // Self-adjoint at real z.
    LinearMap map() const;

    // Neumann statistics of the assembled modes; empty for direct.
    std::optional<LambdaInverseStats> lambda_stats() const;
    int direct_iterations() const { return last_iterations_; }

private:
    SystemSpec spec_;
    Grid grid_;
    double z_;
    ResolventMode mode_;
    double eps_;
    ResolventOptions opt_;
    Eigen::VectorXd R0_;
    std::unique_ptr<HamiltonianEps> h_;
    std::unique_ptr<LambdaMatrix> lambda_;
    std::unique_ptr<LambdaInverse> lambda_inv_;
    std::unique_ptr<ThetaMatrix> theta_;
    std::unique_ptr<NeumannInverse> theta_inv_;
    mutable int last_iterations_ = 0;
};

GridField apply_direct_resolvent(const GridField& psi, const SystemSpec& spec, double z, double eps, double tol,
                                 const BumpProfile& bump = BumpProfile::make());
GridField apply_kk_resolvent(const GridField& psi, const SystemSpec& spec, double z, double eps, double tol,
                             const BumpProfile& bump = BumpProfile::make(), bool force = false);
GridField apply_limit_resolvent(const GridField& psi, const SystemSpec& spec, double z, double tol,
                                const BumpProfile& bump = BumpProfile::make(), bool force = false);
GridField apply_theta_resolvent(const GridField& psi, const SystemSpec& spec, double z, double tol,
                                const BumpProfile& bump = BumpProfile::make(), bool force = false);

struct SweepOptions {
    double tol = 1e-10;
    int iterations = 40; // power iterations per restart
    int restarts = 3;
    std::uint64_t seed = 1;
    ResolventMode eps_mode = ResolventMode::direct;  // how R_{H_eps} is applied
    ResolventMode limit_mode = ResolventMode::theta; // how the limit R is applied
    bool force = false;
};

struct SweepRow {
    double L = 0.0;
    int N = 0;
    double z = 0.0;
    double eps = 0.0;
    double distance = 0.0; // ||R_eps(z) - R(z)||
    double delta = 0.0;    // power-iteration stagnation
    int iterations = 0;
    double wallclock_ms = 0.0;
};

struct SweepSeries {
    double L = 0.0;
    int N = 0;
    double z = 0.0;
    bool decreasing = true;
    std::optional<double> fitted_order;
};

struct ConvergenceReport {
    std::vector<SweepRow> rows;
    std::vector<SweepSeries> series; // one per (grid, z)
    bool all_decreasing() const;
};

// Operator-norm distances ||R_{H_eps}(z) - R(z)|| on every grid of the ladder,
// for every z and eps. eps_list must be decreasing.
ConvergenceReport convergence_sweep(const SystemSpec& spec, const std::vector<double>& z_list,
                                    const std::vector<double>& eps_list, const std::vector<Grid>& grids,
                                    const BumpProfile& bump = BumpProfile::make(), const SweepOptions& opt = {});

// Zero of 1 - g D(z) on the total-momentum-zero slice of the two-body lattice
// problem, where D(z) = (1/L) sum_p 1/(p^2/(2 mu) - z): the limit bound state.
struct ThetaZero {
    double z_coarse = 0.0; // N points per axis
    double z_fine = 0.0;   // 2N points
    double extrapolated = 0.0; // first-order Richardson in the grid step
};

ThetaZero theta_zero_crossing(const SystemSpec& spec, double L, int N);

// Theta(z) = 1 - g D(z) on that slice.
double theta_zero_slice(const SystemSpec& spec, double L, int N, double z);

} // namespace contact
