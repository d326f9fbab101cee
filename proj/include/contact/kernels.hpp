#pragma once

#include "contact/bump.hpp"
#include "contact/lambda.hpp"
#include "contact/linalg.hpp"
#include "contact/model.hpp"

#include <array>
#include <vector>

namespace contact {

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

struct SliceKernelOptions {
    int q_nodes = 96;
    double q_scale = 0.0; // 0 picks sqrt(2 m_max |z|)
    int r_nodes = 0;      // 0 picks the resolution rule for the largest phase
    int max_r_nodes = 256;
};

// Off-diagonal block -g A_sigma R_0(z) A_nu^* of the continuum problem at fixed
// conserved momenta, as an integral operator on L^2(dr dq).
//
// Shared particle (n = 3, sigma = (s,b), nu = (s,c)): conserved total momentum
// K; input momentum q = p_b, output q = p_c, p_s = K - p_b - p_c.
// Disjoint pairs (n = 4, sigma = (i,j), nu = (k,l)): conserved P_sigma and
// P_nu; input q = p_i (p_j = P_sigma - q), output q = p_l (p_k = P_nu - q).
// Kernel: -(g / 2 pi) v(r) v(r') exp(i eps (k_sigma r - k_nu r')) / (E(p) - z).
//
// Discretized by Nystrom on q = c tan(theta) with Gauss-Legendre theta and
// the r-node trapezoid, symmetrized by square-root weights.
class MomentumSliceKernel {
public:
    MomentumSliceKernel(const SystemSpec& spec, const PairIndex& sigma, const PairIndex& nu, double z, double eps,
                        const BumpProfile& bump, std::array<double, 2> conserved = {0.0, 0.0},
                        const SliceKernelOptions& opt = {});

    OverlapClass overlap() const { return overlap_; }
    Eigen::Index size() const { return static_cast<Eigen::Index>(q_.size()) * M_; }
    int q_count() const { return static_cast<int>(q_.size()); }
    int r_count() const { return M_; }
    const RNodes& nodes() const { return nodes_; }

    // Layout [q * M + a]; cost 2 Nq^2 M per application.
    Vec apply(const Vec& x) const;
    Vec apply_adjoint(const Vec& y) const;
    LinearMap map() const;

    // Momentum part at eps = 0: the Nq x Nq matrix with the r-factor removed.
    const Eigen::MatrixXd& momentum_matrix() const { return kq_; }
    // eps = 0: <u,u> times the top singular value of the momentum matrix.
    // eps > 0: power iteration.
    double norm(int iters = 30, int restarts = 2) const;

private:
    SystemSpec spec_;
    PairIndex sigma_, nu_;
    OverlapClass overlap_;
    double eps_;
    RNodes nodes_;
    int M_ = 0;
    std::vector<double> q_, wq_;
    Eigen::MatrixXd kq_;    // sqrt(wq_i) (-g/2pi)/(E - z) sqrt(wq_j), output i, input j
    Eigen::MatrixXd ks_, kn_; // k_sigma and k_nu at (i, j)
};

} // namespace contact
