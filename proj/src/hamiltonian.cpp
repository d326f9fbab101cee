#include "contact/hamiltonian.hpp"

#include "contact/errors.hpp"

#include <Eigen/LU>

#include <cmath>

namespace contact {

struct HamiltonianEps::LuCache {
    std::mutex mu;
    std::optional<cd> z;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu;
};

HamiltonianEps::HamiltonianEps(const SystemSpec& spec, double eps, const Grid& grid, const BumpProfile& bump)
    : spec_(spec), eps_(eps), grid_(grid), bump_(bump), lu_(std::make_shared<LuCache>()) {
    if (grid.dim != spec.n)
        throw DimensionMismatch("grid dimension " + std::to_string(grid.dim) + " differs from n = " +
                                std::to_string(spec.n));
    if (eps < 0.0)
        throw ConfigError("eps must be non-negative");
    if (eps * bump.support_radius() >= 0.5 * grid.L)
        throw PotentialOverflowsBox("eps * a = " + std::to_string(eps * bump.support_radius()) +
                                    " exceeds half the box");
    E_ = kinetic_symbol(grid, spec.masses);
    if (spec.g != 0.0)
        for (const auto& p : enumerate_pairs(spec))
            frames_.push_back(std::make_shared<PairFrame>(spec, p, grid, bump, eps));
}

Vec HamiltonianEps::apply_potential(const Vec& c) const {
    Vec out = Vec::Zero(c.size());
    for (const auto& f : frames_)
        out += f->apply_potential(c);
    return out;
}

Vec HamiltonianEps::apply(const Vec& c) const {
    Vec out = E_.cast<cd>().cwiseProduct(c);
    if (spec_.g != 0.0)
        out -= spec_.g * apply_potential(c);
    return out;
}

Eigen::MatrixXcd HamiltonianEps::dense() const {
    const auto n = static_cast<Eigen::Index>(grid_.size());
    Eigen::MatrixXcd H(n, n);
    Vec e = Vec::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        e[j] = 1.0;
        H.col(j) = apply(e);
        e[j] = 0.0;
    }
    return H;
}

GridField apply_h_eps(const GridField& psi, const HamiltonianEps& h) {
    if (!(psi.grid() == h.grid()))
        throw DimensionMismatch("field grid differs from the Hamiltonian grid");
    return from_spectral(h.grid(), h.apply(to_spectral(psi)));
}

Vec solve_dense(const HamiltonianEps& h, cd z, const Vec& rhs) {
    auto& cache = *h.lu_;
    std::lock_guard<std::mutex> lock(cache.mu);
    if (!cache.z || *cache.z != z) {
        Eigen::MatrixXcd A = h.dense();
        A.diagonal().array() -= z;
        cache.lu.compute(A);
        cache.z = z;
    }
    return cache.lu.solve(rhs);
}

Vec solve_shifted_spectral(const HamiltonianEps& h, cd z, const Vec& rhs, double tol, SolveStats* stats) {
    if (!(tol > 0.0))
        throw ConfigError("solver tolerance must be positive");
    const Eigen::VectorXd& E = h.kinetic();
    Vec inv0(E.size());
    for (Eigen::Index i = 0; i < E.size(); ++i) {
        const cd d = E[i] - z;
        if (std::abs(d) < 1e-14 * (1.0 + std::abs(z)))
            throw ShiftTooCloseToSpectrum("z coincides with a free energy level");
        inv0[i] = 1.0 / d;
    }
    SolveStats local;
    Vec x;
    const double rn = rhs.norm();
    if (h.spec().g == 0.0) {
        x = inv0.cwiseProduct(rhs);
    } else {
        auto A = [&](const Vec& v) { return Vec(h.apply(v) - z * v); };
        auto M = [&](const Vec& v) { return Vec(inv0.cwiseProduct(v)); };
        auto res = gmres(A, M, rhs, tol, 3000, 60);
        local.iterations = res.iterations;
        local.residual = res.residual;
        x = std::move(res.x);
        if (!res.converged) {
            if (h.grid().size() > kDenseLimit)
                throw NoConvergence("GMRES for (H_eps - z)", res.iterations, res.residual);
            x = solve_dense(h, z, rhs);
            local.used_dense = true;
            local.residual = rn > 0.0 ? (h.apply(x) - z * x - rhs).norm() / rn : 0.0;
        }
    }
    if (rn > 0.0 && x.norm() > rn / tol)
        throw ShiftTooCloseToSpectrum("resolvent norm exceeds 1/tol; z is within tolerance of the spectrum");
    if (stats)
        *stats = local;
    return x;
}

GridField solve_shifted(const HamiltonianEps& h, cd z, const GridField& rhs, double tol, SolveStats* stats) {
    if (!(rhs.grid() == h.grid()))
        throw DimensionMismatch("right-hand side grid differs from the Hamiltonian grid");
    return from_spectral(h.grid(), solve_shifted_spectral(h, z, to_spectral(rhs), tol, stats));
}

double default_spectral_shift(const SystemSpec& spec) {
    if (spec.g > 0.0)
        return 1.5 * bound_constants(spec).z0 - 1.0;
    return -1.0;
}

std::vector<double> lowest_eigenvalues(const HamiltonianEps& h, int k, const EigenOptions& opt) {
    if (k < 1)
        throw ConfigError("eigenvalue count must be at least 1");
    const double shift = opt.shift ? *opt.shift : default_spectral_shift(h.spec());
    std::mt19937_64 rng(opt.seed);
    Vec start = random_vector(static_cast<Eigen::Index>(h.grid().size()), rng);
    if (opt.zero_momentum_sector) {
        for (std::size_t idx = 0; idx < h.grid().size(); ++idx) {
            auto m = unflatten(h.grid(), idx);
            int total = 0;
            for (int a : m)
                total += h.grid().wave_index(a);
            if (total != 0)
                start[idx] = 0.0;
        }
        start /= start.norm();
    }
    auto inv = [&](const Vec& v) { return solve_shifted_spectral(h, shift, v, opt.inner_tol); };
    return lowest_from_shift_invert(inv, shift, start, k, opt.rel_tol, opt.max_steps);
}

} // namespace contact
