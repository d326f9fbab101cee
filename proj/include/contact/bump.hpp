#pragma once

#include "contact/grid.hpp"
#include "contact/model.hpp"

#include <memory>
#include <vector>

namespace contact {

// v(x) = c exp(-1/(1 - (x/a)^2)) on |x| < a, zero outside, with c fixed so
// that the integral of v^2 is 1. V = v^2 is the unscaled pair potential.
class BumpProfile {
public:
    static BumpProfile make(double support_radius = 1.0);

    double support_radius() const { return a_; }
    double normalization() const { return c_; }
    double v(double x) const;
    double V(double x) const {
        const double y = v(x);
        return y * y;
    }
    double sup_V() const { return V(0.0); }

private:
    double a_ = 1.0;
    double c_ = 0.0;
};

// V_eps(x) = V(x / eps) / eps.
struct ScaledPotential {
    BumpProfile profile;
    double eps = 1.0;

    double operator()(double x) const { return profile.V(x / eps) / eps; }
    double sup() const { return profile.sup_V() / eps; }
    // Adaptive quadrature of V_eps over its support.
    double integral() const;
};

// (u_eps phi)(r) = sqrt(eps) phi(eps r) on a 1D periodic grid, with r measured
// from the origin in the symmetric window [-L/2, L/2). Evaluation is by exact
// trigonometric interpolation, so the map is unitary up to band-limit error.
// Throws SupportEscapesBox when the dilated field leaves the window.
GridField dilate(const GridField& phi, double eps);

// Nodes on (-a, a) for the relative coordinate of a pair: trapezoid with the
// endpoints dropped (v vanishes there with all derivatives), so sums against
// smooth integrands are spectrally accurate.
struct RNodes {
    std::vector<double> r;
    std::vector<double> w;
    std::vector<double> v;      // v(r_a)
    std::vector<double> sqrt_wv; // sqrt(w_a) v(r_a)

    int size() const { return static_cast<int>(r.size()); }
    double dr() const { return w.empty() ? 0.0 : w[0]; }
    // Discrete <v, v>; equals 1 up to the trapezoid error.
    double v_norm_sq() const;
    // sum_a w_a V(r_a) cos(omega r_a): the Fourier transform of V on the nodes.
    double V_hat(double omega) const;
};

// Smallest node count resolving v together with phases up to eps * dk_max.
int required_r_nodes(const BumpProfile& p, double eps, double dk_max);
// Throws UnresolvedBump if count < 8.
RNodes make_r_nodes(const BumpProfile& p, int count);

// Realization of the pair space chi_sigma for one pair on a laboratory grid.
//
// A slice is a fixed value of (P = p_i + p_j, spectator momenta); P takes
// 2N - 1 values and each spectator N values. Coordinates of a chi vector are
// ordered [slice * M + a] with a the r-node index. Every lab mode belongs to
// exactly one slice, and within a slice the relative momentum k differs from
// p_i by a constant, so the potential is Toeplitz in the mode number of p_i.
class PairFrame {
public:
    // eps = 0 builds the contact limit A_0 = v (x) tau.
    PairFrame(const SystemSpec& spec, const PairIndex& sigma, const Grid& lab, const BumpProfile& profile,
              double eps, int r_nodes = 0);

    const PairIndex& pair() const { return sigma_; }
    const Grid& lab() const { return lab_; }
    double eps() const { return eps_; }
    const RNodes& nodes() const { return nodes_; }
    int slice_count() const { return slices_; }
    Eigen::Index chi_size() const { return static_cast<Eigen::Index>(slices_) * nodes_.size(); }
    // Reduced kinetic energy P^2/2M + sum_spect q^2/2m of a slice.
    double Q(int s) const { return Q_[s]; }
    int slice_of(std::size_t mode) const { return slice_of_[mode]; }
    double k_rel(std::size_t mode) const { return k_[mode]; }
    // Momentum P and signed spectator mode numbers of a slice.
    int P_mode(int s) const;
    std::vector<int> spectator_modes(int s) const;

    // X[s][a] = sqrt(w_a) v(r_a) L^{-1/2} sum_{p in s} c_p exp(i k eps r_a).
    Vec apply_a(const Vec& c) const;
    Vec apply_a_adjoint(const Vec& X) const;
    // T[s] = L^{-1/2} sum_{p in s} c_p: the collision-plane trace in reduced
    // Fourier coefficients.
    Vec trace(const Vec& c) const;
    Vec trace_adjoint(const Vec& T) const;
    // tau R_0(z) tau^* per slice: (1/L) sum_{p in s} 1/(E(p) - z).
    Eigen::VectorXd lattice_D(double z) const;
    // A^* A c, applied as the Toeplitz matrix (1/L) Vhat(eps (k - k')) per slice.
    Vec apply_potential(const Vec& c) const;

    // Lab kinetic symbol E(p), the lab modes of a slice in increasing p_i mode
    // number, and the Toeplitz entry (1/L) Vhat(eps dp d).
    const Eigen::VectorXd& kinetic() const { return E_; }
    const std::vector<std::size_t>& members(int s) const { return members_[s]; }
    double toeplitz(int d) const { return toeplitz_[d]; }

private:
    SystemSpec spec_;
    PairIndex sigma_;
    Grid lab_;
    double eps_;
    RNodes nodes_;
    int slices_ = 0;
    std::vector<int> slice_of_;
    std::vector<double> k_;
    std::vector<double> Q_;
    Eigen::VectorXd E_;
    // Members of each slice ordered by the mode number of p_i.
    std::vector<std::vector<std::size_t>> members_;
    std::vector<double> toeplitz_; // (1/L) Vhat(eps dp d), d = 0..N-1
};

// Convenience wrapper: A_eps^sigma psi for a lab field.
Vec apply_a_eps(const GridField& psi, const SystemSpec& spec, const PairIndex& sigma, double eps,
                const BumpProfile& profile);

} // namespace contact
