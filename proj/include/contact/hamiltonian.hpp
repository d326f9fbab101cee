#pragma once

#include "contact/bump.hpp"
#include "contact/grid.hpp"
#include "contact/linalg.hpp"
#include "contact/model.hpp"

#include <memory>
#include <mutex>
#include <optional>
#include <vector>

namespace contact {

// H_eps = H_0 - g sum_sigma V_eps(x_i - x_j) in the Fourier-Galerkin basis of
// the lab grid. The potential is the exact projection of V_eps onto the grid
// modes, realized as A^* A through each pair frame, so the Konno-Kuroda
// assembly of module resolvent inverts exactly this matrix. eps = 0 gives the
// contact operator H_0 - g <v,v> sum_sigma tau^* tau.
class HamiltonianEps {
public:
    HamiltonianEps(const SystemSpec& spec, double eps, const Grid& grid, const BumpProfile& bump);

    const SystemSpec& spec() const { return spec_; }
    double eps() const { return eps_; }
    const Grid& grid() const { return grid_; }
    const BumpProfile& bump() const { return bump_; }
    const Eigen::VectorXd& kinetic() const { return E_; }
    const std::vector<std::shared_ptr<const PairFrame>>& frames() const { return frames_; }

    // Spectral coefficients in, spectral coefficients out.
    Vec apply(const Vec& c) const;
    // sum_sigma A_sigma^* A_sigma c (no coupling factor).
    Vec apply_potential(const Vec& c) const;
    // Dense Fourier-basis matrix; meant for grids with at most a few thousand modes.
    Eigen::MatrixXcd dense() const;

    struct LuCache;

private:
    SystemSpec spec_;
    double eps_;
    Grid grid_;
    BumpProfile bump_;
    Eigen::VectorXd E_;
    std::vector<std::shared_ptr<const PairFrame>> frames_;
    std::shared_ptr<LuCache> lu_;

    friend Vec solve_dense(const HamiltonianEps& h, cd z, const Vec& rhs);
};

GridField apply_h_eps(const GridField& psi, const HamiltonianEps& h);

struct SolveStats {
    int iterations = 0;
    double residual = 0.0;
    bool used_dense = false;
};

// Largest grid (total modes) for which the dense LU fallback is allowed.
constexpr std::size_t kDenseLimit = 4096;

// (H_eps - z)^{-1} rhs by GMRES right-preconditioned with (H_0 - z)^{-1},
// falling back to a cached dense LU on small grids when GMRES stalls.
Vec solve_shifted_spectral(const HamiltonianEps& h, cd z, const Vec& rhs, double tol, SolveStats* stats = nullptr);
GridField solve_shifted(const HamiltonianEps& h, cd z, const GridField& rhs, double tol,
                        SolveStats* stats = nullptr);

// Dense LU solve, independent of the Krylov path.
Vec solve_dense(const HamiltonianEps& h, cd z, const Vec& rhs);

struct EigenOptions {
    std::optional<double> shift;       // default: safely below the spectrum
    bool zero_momentum_sector = false; // start in the total-momentum-zero sector
    double rel_tol = 1e-10;
    double inner_tol = 1e-12;
    int max_steps = 300;
    std::uint64_t seed = 7;
};

// k lowest eigenvalues by Lanczos on (H_eps - shift)^{-1}.
std::vector<double> lowest_eigenvalues(const HamiltonianEps& h, int k, const EigenOptions& opt = {});

// Shift used by lowest_eigenvalues when none is given: below z0 for g > 0.
double default_spectral_shift(const SystemSpec& spec);

} // namespace contact
