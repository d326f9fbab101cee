#pragma once

#include "contact/bump.hpp"
#include "contact/linalg.hpp"
#include "contact/model.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace contact {

// Diagonal block phi(z) = g A R_0(z) A^* restricted to one reduced-momentum
// slice of the continuum problem, where the slice kinetic energy is Q.
//
// On the r-nodes it is the real symmetric kernel
//   g sqrt(mu/2) / sqrt(Q - z) * u_a exp(-eps kappa |r_a - r_b|) u_b,
// kappa = sqrt(2 mu (Q - z)), u_a = sqrt(w_a) v(r_a). At eps = 0 it is the
// rank-one map multiplier() |u><u|.
class DiagonalSlice {
public:
    DiagonalSlice(const PairIndex& sigma, double g, double z, double Q, double eps, const RNodes& nodes);

    double multiplier() const { return mult_; }
    double decay() const { return beta_; } // eps kappa
    int size() const { return static_cast<int>(u_.size()); }

    // O(M) by the two-sided exponential recursion.
    Vec apply(const Vec& x) const;
    // Rank-one times multiplier; only meaningful at eps = 0.
    Vec apply_factorized(const Vec& x) const;
    Eigen::MatrixXd kernel() const;
    // Largest |eigenvalue| of the kernel.
    double norm() const;

private:
    std::vector<double> u_;
    std::vector<double> r_;
    double mult_ = 0.0;
    double beta_ = 0.0;
    double g_ = 0.0;
};

enum class Representation { continuum, lattice };

// phi_sigma(z) on the chi_sigma layout of a pair frame. The continuum
// representation applies DiagonalSlice with Q from the frame; the lattice
// representation is g A R_0(z) A^* through the lab grid, the block that enters
// the Konno-Kuroda assembly.
class DiagonalBlock {
public:
    DiagonalBlock(std::shared_ptr<const PairFrame> frame, double g, double z, Representation rep);

    const PairIndex& sigma() const { return frame_->pair(); }
    double z() const { return z_; }
    bool is_limit() const { return frame_->eps() == 0.0; }
    Representation representation() const { return rep_; }
    const PairFrame& frame() const { return *frame_; }

    Vec apply(const Vec& X) const;
    LinearMap map() const;
    // Exact norm: the block is block diagonal over slices, each slice solved
    // densely. The continuum norm is attained at the smallest Q.
    double norm() const;
    // Hermitian M x M matrix of one slice.
    Eigen::MatrixXcd slice_matrix(int s) const;

private:
    std::shared_ptr<const PairFrame> frame_;
    double g_;
    double z_;
    Representation rep_;
};

// Continuum diagonal norm supremum over Q >= 0, attained at Q = 0.
double continuum_diagonal_norm(const PairIndex& sigma, double g, double z, double eps, const RNodes& nodes);

// The bound |g| c_frak / sqrt|z| of the diagonal blocks and |g| K / sqrt|z| of
// the off-diagonal ones.
double diagonal_norm_bound(const SystemSpec& spec, double z);
double offdiagonal_norm_bound(const SystemSpec& spec, double z);

enum class OverlapClass { shared_particle, disjoint };

// Throws SameBlockRequested for sigma == nu.
OverlapClass overlap_class(const PairIndex& sigma, const PairIndex& nu);

// Prefactor of the real-space limit kernel C v G^(d) v of the block
// -g A_sigma R_0 A_nu^*: -g prod_k sqrt(2 m_k) over the d particles involved,
// d = 3 for a shared particle and 4 for disjoint pairs.
double offdiagonal_kernel_constant(const SystemSpec& spec, const PairIndex& sigma, const PairIndex& nu);

// -g A_sigma R_0(z) A_nu^* : chi_nu -> chi_sigma through the lab grid.
class OffDiagonalBlock {
public:
    OffDiagonalBlock(std::shared_ptr<const PairFrame> sigma, std::shared_ptr<const PairFrame> nu, double g, double z);

    const PairIndex& sigma() const { return sigma_->pair(); }
    const PairIndex& nu() const { return nu_->pair(); }
    OverlapClass overlap() const { return overlap_; }

    Vec apply(const Vec& X) const;
    Vec apply_adjoint(const Vec& Y) const;
    LinearMap map() const;

private:
    std::shared_ptr<const PairFrame> sigma_, nu_;
    double g_, z_;
    OverlapClass overlap_;
    Eigen::VectorXd R0_;
};

// Generic inverse {1 + D^{-1} O}^{-1} D^{-1} of a block operator D + O with
// an exactly applicable D^{-1}. Terms of the outer series are kept while
// ratio^k / (1 - ratio) >= tol or the last term is still above tol relative
// to the sum, capped at 200.
struct NeumannInverse {
    Apply diag_inverse;
    Apply off;
    Apply off_adjoint;
    Eigen::Index size = 0;
    double ratio = 0.0; // measured ||D^{-1} O||
    int terms = 1;
    double tol = 1e-12;

    Vec apply(const Vec& y) const;
};

// Number of series terms needed for a geometric tail below tol.
int neumann_terms(double ratio, double tol);

// Lambda(z) = 1 - g A R_0(z) A^* on the concatenation of all chi_sigma, all
// pair frames sharing one lab grid and one eps (eps = 0 gives Lambda_0).
class LambdaMatrix {
public:
    LambdaMatrix(const SystemSpec& spec, std::vector<std::shared_ptr<const PairFrame>> frames, double z);

    const SystemSpec& spec() const { return spec_; }
    double z() const { return z_; }
    bool is_limit() const;
    Eigen::Index size() const { return offsets_.back(); }
    int block_count() const { return static_cast<int>(frames_.size()); }
    Eigen::Index offset(int b) const { return offsets_[b]; }
    const std::vector<std::shared_ptr<const PairFrame>>& frames() const { return frames_; }

    // Stacked A = (A_sigma)_sigma and its adjoint.
    Vec apply_a(const Vec& c) const;
    Vec apply_a_adjoint(const Vec& X) const;

    Vec apply(const Vec& X) const;
    Vec apply_diag(const Vec& X) const; // 1 - phi on each block
    Vec apply_off(const Vec& X) const;  // off-diagonal blocks only
    DiagonalBlock diagonal_block(int b) const;
    OffDiagonalBlock offdiagonal_block(int b, int c) const;

private:
    SystemSpec spec_;
    std::vector<std::shared_ptr<const PairFrame>> frames_;
    double z_;
    Eigen::VectorXd R0_;
    std::vector<Eigen::Index> offsets_;
};

struct LambdaInverseStats {
    std::vector<double> diag_ratio; // ||phi_sigma|| per block
    std::vector<int> diag_terms;    // 0 when the closed form is used
    double off_ratio = 0.0;         // ||Lambda_diag^{-1} Lambda_off||
    int off_terms = 1;
};

// Lambda^{-1} = {1 + Lambda_diag^{-1} Lambda_off}^{-1} Lambda_diag^{-1}.
// The diagonal inverse is a Neumann series in phi for eps > 0 and the closed
// form 1 + |u><u| (x) gD (1 - g<u,u>D)^{-1} in the limit. Throws AboveThreshold
// for z >= z0 unless force is set, and SeriesDiverging when a measured ratio
// reaches 1.
class LambdaInverse {
public:
    LambdaInverse(const LambdaMatrix& m, double tol, bool force = false);

    Vec apply(const Vec& Y) const;
    Vec apply_diag_inverse(const Vec& Y) const;
    const LambdaInverseStats& stats() const { return stats_; }

private:
    const LambdaMatrix* m_;
    double tol_;
    LambdaInverseStats stats_;
    std::vector<Eigen::VectorXd> closed_; // per block: gD / (1 - g<u,u>D) per slice
    NeumannInverse outer_;
};

LambdaInverse invert_lambda(const LambdaMatrix& m, double tol, bool force = false);

// Theta(z) on the reduced spaces of all pairs: diagonal 1 - g D_sigma(z)
// (lattice multiplier per slice), off-diagonal -g tau_sigma R_0(z) tau_nu^*.
class ThetaMatrix {
public:
    ThetaMatrix(const SystemSpec& spec, std::vector<std::shared_ptr<const PairFrame>> frames, double z);

    Eigen::Index size() const { return offsets_.back(); }
    int block_count() const { return static_cast<int>(frames_.size()); }
    Eigen::Index offset(int b) const { return offsets_[b]; }

    // Stacked G(z) = tau R_0(z) and G(z)^* = R_0(z) tau^*.
    Vec apply_g(const Vec& c) const;
    Vec apply_g_adjoint(const Vec& T) const;

    Vec apply(const Vec& T) const;
    Vec apply_adjoint(const Vec& T) const;
    Vec apply_off(const Vec& T) const;
    const Eigen::VectorXd& diagonal() const { return diag_; }

private:
    SystemSpec spec_;
    std::vector<std::shared_ptr<const PairFrame>> frames_;
    double z_;
    Eigen::VectorXd R0_;
    Eigen::VectorXd diag_;
    std::vector<Eigen::Index> offsets_;
};

// Theta^{-1} by the same outer series; same threshold rules as LambdaInverse.
NeumannInverse invert_theta(const ThetaMatrix& t, const SystemSpec& spec, double z, double tol, bool force = false);

struct BlockConvergenceRow {
    double eps = 0.0;
    double distance = 0.0;   // ||block_eps - block_limit||
    double block_norm = 0.0; // ||block_eps||
    double bound = 0.0;      // operator-norm bound for ||block_eps||
};

struct BlockConvergenceReport {
    PairIndex sigma;
    std::optional<PairIndex> nu;
    double z = 0.0;
    std::vector<BlockConvergenceRow> rows;
    std::optional<double> fitted_order; // least-squares slope of log distance on log eps
    bool decreasing = true;
};

// Least-squares slope of log y against log x; empty for fewer than two points.
std::optional<double> fit_order(const std::vector<double>& x, const std::vector<double>& y);

// Diagonal: continuum slice kernels, sup over a Q scan. Off-diagonal: the
// momentum-slice kernel path at zero conserved momenta (n = 3 shared particle
// or n = 4 disjoint pairs).
BlockConvergenceReport verify_block_convergence(const SystemSpec& spec, const PairIndex& sigma,
                                                const std::optional<PairIndex>& nu, double z,
                                                const std::vector<double>& eps_list, const BumpProfile& bump);

} // namespace contact
