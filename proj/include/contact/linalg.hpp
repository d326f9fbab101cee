#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace contact {

using cd = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Apply = std::function<Vec(const Vec&)>;

// A linear map C^cols -> C^rows known only through its action and the action
// of its adjoint.
struct LinearMap {
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    Apply apply;
    Apply apply_adjoint;

    static LinearMap self_adjoint(Eigen::Index n, Apply f) { return LinearMap{n, n, f, f}; }
};

struct NormEstimate {
    double value = 0.0; // best estimate of the operator norm
    double delta = 0.0; // |last - previous| of the Rayleigh sequence, worst over restarts
    int iterations = 0;
};

// Power iteration on op* op from `restarts` random unit starts; the maximum is
// reported. Deterministic for a fixed seed.
NormEstimate operator_norm(const LinearMap& op, int iters = 40, int restarts = 3, std::uint64_t seed = 1);

// Standard complex Gaussian entries; unit norm when normalize is set.
Vec random_vector(Eigen::Index n, std::mt19937_64& rng, bool normalize = true);

struct GmresResult {
    Vec x;
    int iterations = 0;
    double residual = 0.0; // ||b - A x|| / ||b||
    bool converged = false;
};

// Restarted GMRES with right preconditioner M^{-1}: solves A x = b with
// relative residual tol. `precond` may be empty.
GmresResult gmres(const Apply& A, const Apply& precond, const Vec& b, double tol, int max_iter = 2000,
                  int restart = 60);

// Largest algebraic eigenvalues of a Hermitian operator by Lanczos with full
// reorthogonalization. Converged to rel_tol on the Ritz residual, or throws
// NoConvergence after max_steps.
std::vector<double> lanczos_largest(const Apply& op, const Vec& start, int k, double rel_tol = 1e-10,
                                    int max_steps = 300);

// Lowest k eigenvalues of a Hermitian H from its shifted inverse
// (H - shift)^{-1}, shift strictly below the spectrum.
std::vector<double> lowest_from_shift_invert(const Apply& shifted_inverse, double shift, const Vec& start, int k,
                                             double rel_tol = 1e-10, int max_steps = 300);

// Caps the workers used by parallel_for; 0 means hardware concurrency.
void set_thread_count(int n);
int thread_count();

// Runs body(i) for i in [0, count). Each index is handled exactly once and
// results written to disjoint slots stay bitwise deterministic.
void parallel_for(int count, const std::function<void(int)>& body);

} // namespace contact
