#include "contact/resolvent.hpp"

#include "contact/errors.hpp"

#include <boost/math/tools/roots.hpp>

#include <chrono>
#include <cmath>
#include <numbers>

namespace contact {

std::string to_string(ResolventMode m) {
    switch (m) {
    case ResolventMode::direct:
        return "direct";
    case ResolventMode::konno_kuroda:
        return "konno-kuroda";
    case ResolventMode::limit:
        return "limit";
    case ResolventMode::theta:
        return "theta";
    }
    return "unknown";
}

ResolventMode resolvent_mode_from_string(const std::string& s) {
    for (auto m : {ResolventMode::direct, ResolventMode::konno_kuroda, ResolventMode::limit, ResolventMode::theta})
        if (to_string(m) == s)
            return m;
    throw ConfigError("unknown resolvent mode '" + s + "'");
}

ResolventAssembly::ResolventAssembly(const SystemSpec& spec, const Grid& grid, const BumpProfile& bump, double z,
                                     ResolventMode mode, double eps, const ResolventOptions& opt)
    : spec_(spec), grid_(grid), z_(z), mode_(mode), eps_(eps), opt_(opt) {
    if (grid.dim != spec.n)
        throw DimensionMismatch("grid dimension differs from particle count");
    if (!(z < 0.0))
        throw ConfigError("resolvent assembly needs a negative real z, got " + std::to_string(z));
    if (!(opt.tol > 0.0))
        throw ConfigError("resolvent tolerance must be positive");
    if (mode == ResolventMode::limit || mode == ResolventMode::theta)
        eps_ = 0.0;
    R0_ = (kinetic_symbol(grid, spec.masses).array() - z).inverse();
    if (spec.g == 0.0)
        return;
    if (mode == ResolventMode::direct) {
        h_ = std::make_unique<HamiltonianEps>(spec, eps_, grid, bump);
        return;
    }
    std::vector<std::shared_ptr<const PairFrame>> frames;
    for (const auto& p : enumerate_pairs(spec))
        frames.push_back(std::make_shared<PairFrame>(spec, p, grid, bump, eps_));
    if (mode == ResolventMode::theta) {
        theta_ = std::make_unique<ThetaMatrix>(spec, frames, z);
        theta_inv_ = std::make_unique<NeumannInverse>(invert_theta(*theta_, spec, z, opt.tol, opt.force));
    } else {
        lambda_ = std::make_unique<LambdaMatrix>(spec, frames, z);
        lambda_inv_ = std::make_unique<LambdaInverse>(*lambda_, opt.tol, opt.force);
    }
}

ResolventAssembly::~ResolventAssembly() = default;

Vec ResolventAssembly::apply(const Vec& c) const {
    if (c.size() != static_cast<Eigen::Index>(grid_.size()))
        throw DimensionMismatch("resolvent applied to coefficients of the wrong size");
    const Vec r = c.cwiseProduct(R0_.cast<cd>());
    if (spec_.g == 0.0)
        return r;
    switch (mode_) {
    case ResolventMode::direct: {
        SolveStats st;
        Vec x = solve_shifted_spectral(*h_, z_, c, opt_.tol, &st);
        last_iterations_ = st.iterations;
        return x;
    }
    case ResolventMode::theta: {
        const Vec S = theta_inv_->apply(theta_->apply_g(c));
        return r + spec_.g * theta_->apply_g_adjoint(S);
    }
    default: {
        const Vec Y = lambda_inv_->apply(lambda_->apply_a(r));
        return r + spec_.g * lambda_->apply_a_adjoint(Y).cwiseProduct(R0_.cast<cd>());
    }
    }
}

GridField ResolventAssembly::apply(const GridField& psi) const {
    if (!(psi.grid() == grid_))
        throw DimensionMismatch("field grid differs from the assembly grid");
    return from_spectral(grid_, apply(to_spectral(psi)));
}

LinearMap ResolventAssembly::map() const {
    return LinearMap::self_adjoint(static_cast<Eigen::Index>(grid_.size()),
                                   [this](const Vec& c) { return apply(c); });
}

std::optional<LambdaInverseStats> ResolventAssembly::lambda_stats() const {
    if (lambda_inv_)
        return lambda_inv_->stats();
    if (theta_inv_) {
        LambdaInverseStats s;
        s.off_ratio = theta_inv_->ratio;
        s.off_terms = theta_inv_->terms;
        return s;
    }
    return std::nullopt;
}

namespace {

GridField run(const GridField& psi, const SystemSpec& spec, double z, ResolventMode mode, double eps, double tol,
              const BumpProfile& bump, bool force) {
    ResolventOptions opt;
    opt.tol = tol;
    opt.force = force;
    ResolventAssembly a(spec, psi.grid(), bump, z, mode, eps, opt);
    return a.apply(psi);
}

} // namespace

GridField apply_direct_resolvent(const GridField& psi, const SystemSpec& spec, double z, double eps, double tol,
                                 const BumpProfile& bump) {
    return run(psi, spec, z, ResolventMode::direct, eps, tol, bump, false);
}

GridField apply_kk_resolvent(const GridField& psi, const SystemSpec& spec, double z, double eps, double tol,
                             const BumpProfile& bump, bool force) {
    return run(psi, spec, z, ResolventMode::konno_kuroda, eps, tol, bump, force);
}

GridField apply_limit_resolvent(const GridField& psi, const SystemSpec& spec, double z, double tol,
                                const BumpProfile& bump, bool force) {
    return run(psi, spec, z, ResolventMode::limit, 0.0, tol, bump, force);
}

GridField apply_theta_resolvent(const GridField& psi, const SystemSpec& spec, double z, double tol,
                                const BumpProfile& bump, bool force) {
    return run(psi, spec, z, ResolventMode::theta, 0.0, tol, bump, force);
}

bool ConvergenceReport::all_decreasing() const {
    for (const auto& s : series)
        if (!s.decreasing)
            return false;
    return true;
}

ConvergenceReport convergence_sweep(const SystemSpec& spec, const std::vector<double>& z_list,
                                    const std::vector<double>& eps_list, const std::vector<Grid>& grids,
                                    const BumpProfile& bump, const SweepOptions& opt) {
    for (std::size_t i = 1; i < eps_list.size(); ++i)
        if (!(eps_list[i] < eps_list[i - 1]))
            throw ConfigError("eps list must be strictly decreasing");
    ConvergenceReport rep;
    ResolventOptions ropt;
    ropt.tol = opt.tol;
    ropt.force = opt.force;
    for (const Grid& grid : grids)
        for (double z : z_list) {
            ResolventAssembly limit(spec, grid, bump, z, opt.limit_mode, 0.0, ropt);
            SweepSeries ser{grid.L, grid.N, z, true, std::nullopt};
            std::vector<double> e, d;
            for (double eps : eps_list) {
                const auto t0 = std::chrono::steady_clock::now();
                ResolventAssembly reg(spec, grid, bump, z, opt.eps_mode, eps, ropt);
                const auto n = static_cast<Eigen::Index>(grid.size());
                auto diff = LinearMap::self_adjoint(n, [&](const Vec& c) { return Vec(reg.apply(c) - limit.apply(c)); });
                const NormEstimate est = operator_norm(diff, opt.iterations, opt.restarts, opt.seed);
                const auto t1 = std::chrono::steady_clock::now();
                SweepRow row{grid.L, grid.N, z, eps, est.value, est.delta, est.iterations,
                             std::chrono::duration<double, std::milli>(t1 - t0).count()};
                if (!d.empty() && !(row.distance < d.back()))
                    ser.decreasing = false;
                e.push_back(eps);
                d.push_back(row.distance);
                rep.rows.push_back(row);
            }
            ser.fitted_order = fit_order(e, d);
            rep.series.push_back(ser);
        }
    return rep;
}

double theta_zero_slice(const SystemSpec& spec, double L, int N, double z) {
    if (spec.n != 2)
        throw DimensionMismatch("the zero-momentum theta slice is defined for two particles");
    if (!(z < 0.0))
        throw ConfigError("theta slice needs z < 0");
    const double mu = enumerate_pairs(spec)[0].mu;
    double D = 0.0;
    for (int m = -N / 2 + 1; m < N / 2; ++m) {
        const double p = 2.0 * std::numbers::pi * m / L;
        D += 1.0 / (p * p / (2.0 * mu) - z);
    }
    return 1.0 - spec.g * D / L;
}

ThetaZero theta_zero_crossing(const SystemSpec& spec, double L, int N) {
    if (!(spec.g > 0.0))
        throw ConfigError("theta has no zero below the spectrum for g <= 0");
    auto root = [&](int n) {
        auto f = [&](double z) { return theta_zero_slice(spec, L, n, z); };
        // The p = 0 term alone gives g D > 1 for |z| < g / L.
        double hi = -0.5 * spec.g / L;
        double lo = 2.0 * hi;
        while (f(lo) <= 0.0)
            lo *= 2.0;
        std::uintmax_t iters = 200;
        auto r = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
        return 0.5 * (r.first + r.second);
    };
    ThetaZero t;
    t.z_coarse = root(N);
    t.z_fine = root(2 * N);
    t.extrapolated = 2.0 * t.z_fine - t.z_coarse;
    return t;
}

} // namespace contact
