#include "contact/lambda.hpp"

#include "contact/errors.hpp"
#include "contact/kernels.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace contact {

namespace {

// y_a = mult u_a sum_b rho^{|a-b|} u_b x_b on uniform nodes, rho in (0, 1].
void exp_kernel_apply(const std::vector<double>& u, double rho, double mult, const cd* x, cd* y) {
    const int M = static_cast<int>(u.size());
    cd fwd = 0.0;
    for (int a = 0; a < M; ++a) {
        fwd = rho * fwd + u[a] * x[a];
        y[a] = fwd;
    }
    cd bwd = 0.0;
    for (int a = M - 1; a >= 0; --a) {
        y[a] = mult * u[a] * (y[a] + bwd);
        bwd = rho * (bwd + u[a] * x[a]);
    }
}

double kappa(const PairIndex& s, double Q, double z) { return std::sqrt(2.0 * s.mu * (Q - z)); }

void require_negative(double z) {
    if (!(z < 0.0))
        throw ConfigError("spectral point must be negative, got z = " + std::to_string(z));
}

std::vector<Eigen::Index> block_offsets(const std::vector<Eigen::Index>& sizes) {
    std::vector<Eigen::Index> off(sizes.size() + 1, 0);
    for (std::size_t b = 0; b < sizes.size(); ++b)
        off[b + 1] = off[b] + sizes[b];
    return off;
}

} // namespace

DiagonalSlice::DiagonalSlice(const PairIndex& sigma, double g, double z, double Q, double eps, const RNodes& nodes)
    : u_(nodes.sqrt_wv), r_(nodes.r), g_(g) {
    require_negative(z);
    if (Q < 0.0)
        throw ConfigError("slice kinetic energy must be non-negative");
    mult_ = g * std::sqrt(sigma.mu / 2.0) / std::sqrt(Q - z);
    beta_ = eps * kappa(sigma, Q, z);
}

Vec DiagonalSlice::apply(const Vec& x) const {
    Vec y(x.size());
    const double dr = r_.size() > 1 ? r_[1] - r_[0] : 0.0;
    exp_kernel_apply(u_, std::exp(-beta_ * dr), mult_, x.data(), y.data());
    return y;
}

Vec DiagonalSlice::apply_factorized(const Vec& x) const {
    Eigen::Map<const Eigen::VectorXd> u(u_.data(), size());
    const cd proj = u.cast<cd>().dot(x);
    return (mult_ * proj) * u.cast<cd>();
}

Eigen::MatrixXd DiagonalSlice::kernel() const {
    const int M = size();
    Eigen::MatrixXd K(M, M);
    for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b)
            K(a, b) = mult_ * u_[a] * std::exp(-beta_ * std::abs(r_[a] - r_[b])) * u_[b];
    return K;
}

double DiagonalSlice::norm() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kernel(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

double continuum_diagonal_norm(const PairIndex& sigma, double g, double z, double eps, const RNodes& nodes) {
    return DiagonalSlice(sigma, g, z, 0.0, eps, nodes).norm();
}

DiagonalBlock::DiagonalBlock(std::shared_ptr<const PairFrame> frame, double g, double z, Representation rep)
    : frame_(std::move(frame)), g_(g), z_(z), rep_(rep) {
    require_negative(z);
}

Vec DiagonalBlock::apply(const Vec& X) const {
    const PairFrame& f = *frame_;
    if (X.size() != f.chi_size())
        throw DimensionMismatch("diagonal block applied to a vector of the wrong size");
    if (rep_ == Representation::lattice) {
        Vec c = f.apply_a_adjoint(X);
        c.array() /= (f.kinetic().array() - z_).cast<cd>();
        return g_ * f.apply_a(c);
    }
    const int M = f.nodes().size();
    const double dr = f.nodes().dr();
    Vec Y(X.size());
    for (int s = 0; s < f.slice_count(); ++s) {
        if (f.members(s).empty()) {
            Y.segment(static_cast<Eigen::Index>(s) * M, M).setZero();
            continue;
        }
        const double Q = f.Q(s);
        const double mult = g_ * std::sqrt(f.pair().mu / 2.0) / std::sqrt(Q - z_);
        const double rho = std::exp(-f.eps() * kappa(f.pair(), Q, z_) * dr);
        exp_kernel_apply(f.nodes().sqrt_wv, rho, mult, X.data() + static_cast<Eigen::Index>(s) * M,
                         Y.data() + static_cast<Eigen::Index>(s) * M);
    }
    return Y;
}

LinearMap DiagonalBlock::map() const {
    return LinearMap::self_adjoint(frame_->chi_size(), [this](const Vec& x) { return apply(x); });
}

Eigen::MatrixXcd DiagonalBlock::slice_matrix(int s) const {
    const PairFrame& f = *frame_;
    const RNodes& nd = f.nodes();
    const int M = nd.size();
    if (rep_ == Representation::continuum)
        return DiagonalSlice(f.pair(), g_, z_, f.Q(s), f.eps(), nd).kernel().cast<cd>();
    Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(M, M);
    Vec a(M);
    for (std::size_t idx : f.members(s)) {
        const double k = f.k_rel(idx);
        for (int i = 0; i < M; ++i)
            a[i] = nd.sqrt_wv[i] * std::polar(1.0, k * f.eps() * nd.r[i]);
        S += (g_ / (f.lab().L * (f.kinetic()[idx] - z_))) * a * a.adjoint();
    }
    return S;
}

double DiagonalBlock::norm() const {
    const PairFrame& f = *frame_;
    if (rep_ == Representation::continuum) {
        double qmin = std::numeric_limits<double>::infinity();
        for (int s = 0; s < f.slice_count(); ++s)
            if (!f.members(s).empty())
                qmin = std::min(qmin, f.Q(s));
        return DiagonalSlice(f.pair(), g_, z_, qmin, f.eps(), f.nodes()).norm();
    }
    // Nonzero spectrum of B D B^* equals that of D^{1/2} B^* B D^{1/2}, and
    // B^* B is L times the Toeplitz matrix of the slice.
    double best = 0.0;
    for (int s = 0; s < f.slice_count(); ++s) {
        const auto& mem = f.members(s);
        const int len = static_cast<int>(mem.size());
        if (len == 0)
            continue;
        Eigen::VectorXd d(len);
        for (int i = 0; i < len; ++i)
            d[i] = 1.0 / (f.kinetic()[mem[i]] - z_);
        Eigen::MatrixXd G(len, len);
        for (int i = 0; i < len; ++i)
            for (int j = 0; j < len; ++j)
                G(i, j) = g_ * std::sqrt(d[i] * d[j]) * f.toeplitz(std::abs(i - j));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
        best = std::max(best, es.eigenvalues().cwiseAbs().maxCoeff());
    }
    return best;
}

double diagonal_norm_bound(const SystemSpec& spec, double z) {
    return bound_constants(spec).c_frak * std::abs(spec.g) / std::sqrt(std::abs(z));
}

double offdiagonal_norm_bound(const SystemSpec& spec, double z) {
    return bound_constants(spec).k_const * std::abs(spec.g) / std::sqrt(std::abs(z));
}

OverlapClass overlap_class(const PairIndex& sigma, const PairIndex& nu) {
    if (sigma == nu)
        throw SameBlockRequested("off-diagonal block requested for the pair " + sigma.label() + " with itself");
    const int common = static_cast<int>(sigma.contains(nu.i)) + static_cast<int>(sigma.contains(nu.j));
    return common == 1 ? OverlapClass::shared_particle : OverlapClass::disjoint;
}

double offdiagonal_kernel_constant(const SystemSpec& spec, const PairIndex& sigma, const PairIndex& nu) {
    overlap_class(sigma, nu);
    double c = -spec.g;
    for (int k = 0; k < spec.n; ++k)
        if (sigma.contains(k) || nu.contains(k))
            c *= std::sqrt(2.0 * spec.masses[k]);
    return c;
}

OffDiagonalBlock::OffDiagonalBlock(std::shared_ptr<const PairFrame> sigma, std::shared_ptr<const PairFrame> nu,
                                   double g, double z)
    : sigma_(std::move(sigma)), nu_(std::move(nu)), g_(g), z_(z) {
    require_negative(z);
    overlap_ = overlap_class(sigma_->pair(), nu_->pair());
    if (!(sigma_->lab() == nu_->lab()))
        throw DimensionMismatch("pair frames live on different lab grids");
    R0_ = (sigma_->kinetic().array() - z).inverse();
}

Vec OffDiagonalBlock::apply(const Vec& X) const {
    Vec c = nu_->apply_a_adjoint(X);
    c.array() *= R0_.cast<cd>().array();
    return -g_ * sigma_->apply_a(c);
}

Vec OffDiagonalBlock::apply_adjoint(const Vec& Y) const {
    Vec c = sigma_->apply_a_adjoint(Y);
    c.array() *= R0_.cast<cd>().array();
    return -g_ * nu_->apply_a(c);
}

LinearMap OffDiagonalBlock::map() const {
    return LinearMap{sigma_->chi_size(), nu_->chi_size(), [this](const Vec& x) { return apply(x); },
                     [this](const Vec& y) { return apply_adjoint(y); }};
}

int neumann_terms(double ratio, double tol) {
    if (ratio <= 0.0)
        return 1;
    int k = 1;
    while (std::pow(ratio, k) / (1.0 - ratio) >= tol && k < 200)
        ++k;
    return k;
}

Vec NeumannInverse::apply(const Vec& y) const {
    Vec term = diag_inverse ? diag_inverse(y) : y;
    Vec sum = term;
    if (!off)
        return sum;
    for (int k = 1; k < 200; ++k) {
        const bool enough = k >= terms;
        if (enough && term.norm() <= tol * sum.norm())
            break;
        Vec t = off(term);
        term = diag_inverse ? Vec(-diag_inverse(t)) : Vec(-t);
        sum += term;
    }
    return sum;
}

LambdaMatrix::LambdaMatrix(const SystemSpec& spec, std::vector<std::shared_ptr<const PairFrame>> frames, double z)
    : spec_(spec), frames_(std::move(frames)), z_(z) {
    require_negative(z);
    if (frames_.empty())
        throw ConfigError("Lambda needs at least one pair frame");
    std::vector<Eigen::Index> sizes;
    for (const auto& f : frames_) {
        if (!(f->lab() == frames_[0]->lab()) || f->eps() != frames_[0]->eps())
            throw DimensionMismatch("pair frames of one Lambda must share lab grid and eps");
        sizes.push_back(f->chi_size());
    }
    offsets_ = block_offsets(sizes);
    R0_ = (frames_[0]->kinetic().array() - z).inverse();
}

bool LambdaMatrix::is_limit() const { return frames_[0]->eps() == 0.0; }

Vec LambdaMatrix::apply_a(const Vec& c) const {
    Vec X(size());
    for (int b = 0; b < block_count(); ++b)
        X.segment(offsets_[b], frames_[b]->chi_size()) = frames_[b]->apply_a(c);
    return X;
}

Vec LambdaMatrix::apply_a_adjoint(const Vec& X) const {
    Vec c = Vec::Zero(R0_.size());
    for (int b = 0; b < block_count(); ++b)
        c += frames_[b]->apply_a_adjoint(X.segment(offsets_[b], frames_[b]->chi_size()));
    return c;
}

Vec LambdaMatrix::apply(const Vec& X) const {
    Vec c = apply_a_adjoint(X);
    c.array() *= R0_.cast<cd>().array();
    return X - spec_.g * apply_a(c);
}

Vec LambdaMatrix::apply_diag(const Vec& X) const {
    Vec Y(size());
    for (int b = 0; b < block_count(); ++b) {
        const auto n = frames_[b]->chi_size();
        Vec c = frames_[b]->apply_a_adjoint(X.segment(offsets_[b], n));
        c.array() *= R0_.cast<cd>().array();
        Y.segment(offsets_[b], n) = X.segment(offsets_[b], n) - spec_.g * frames_[b]->apply_a(c);
    }
    return Y;
}

Vec LambdaMatrix::apply_off(const Vec& X) const {
    if (block_count() == 1)
        return Vec::Zero(size());
    return apply(X) - apply_diag(X);
}

DiagonalBlock LambdaMatrix::diagonal_block(int b) const {
    return DiagonalBlock(frames_[b], spec_.g, z_, Representation::lattice);
}

OffDiagonalBlock LambdaMatrix::offdiagonal_block(int b, int c) const {
    return OffDiagonalBlock(frames_[b], frames_[c], spec_.g, z_);
}

namespace {

void check_threshold(const SystemSpec& spec, double z, bool force) {
    const double z0 = bound_constants(spec).z0;
    if (!force && !(z < z0))
        throw AboveThreshold(z, z0);
}

double measured_ratio(const NeumannInverse& inv) {
    LinearMap m{inv.size, inv.size, [&](const Vec& x) { return Vec(inv.diag_inverse(inv.off(x))); },
                [&](const Vec& x) { return Vec(inv.off_adjoint(inv.diag_inverse(x))); }};
    return operator_norm(m, 20, 2, 17).value;
}

} // namespace

LambdaInverse::LambdaInverse(const LambdaMatrix& m, double tol, bool force) : m_(&m), tol_(tol) {
    if (!(tol > 0.0))
        throw ConfigError("Neumann tolerance must be positive");
    check_threshold(m.spec(), m.z(), force);
    const double g = m.spec().g;
    for (int b = 0; b < m.block_count(); ++b) {
        const PairFrame& f = *m.frames()[b];
        if (m.is_limit()) {
            const double c = f.nodes().v_norm_sq();
            Eigen::VectorXd gD = g * f.lattice_D(m.z());
            const double ratio = c * gD.cwiseAbs().maxCoeff();
            stats_.diag_ratio.push_back(ratio);
            stats_.diag_terms.push_back(0);
            if (ratio >= 1.0)
                throw SeriesDiverging(ratio);
            closed_.push_back(gD.array() / (1.0 - c * gD.array()));
        } else {
            const double ratio = m.diagonal_block(b).norm();
            stats_.diag_ratio.push_back(ratio);
            if (ratio >= 1.0)
                throw SeriesDiverging(ratio);
            stats_.diag_terms.push_back(neumann_terms(ratio, tol));
        }
    }
    outer_.size = m.size();
    outer_.tol = tol;
    outer_.diag_inverse = [this](const Vec& y) { return apply_diag_inverse(y); };
    if (m.block_count() > 1) {
        outer_.off = [this](const Vec& x) { return m_->apply_off(x); };
        outer_.off_adjoint = outer_.off; // Lambda_off is self-adjoint at real z
        outer_.ratio = measured_ratio(outer_);
        if (outer_.ratio >= 1.0)
            throw SeriesDiverging(outer_.ratio);
        outer_.terms = neumann_terms(outer_.ratio, tol);
    }
    stats_.off_ratio = outer_.ratio;
    stats_.off_terms = outer_.terms;
}

Vec LambdaInverse::apply_diag_inverse(const Vec& Y) const {
    const LambdaMatrix& m = *m_;
    Vec X(Y.size());
    for (int b = 0; b < m.block_count(); ++b) {
        const PairFrame& f = *m.frames()[b];
        const auto n = f.chi_size();
        const Vec y = Y.segment(m.offset(b), n);
        if (m.is_limit()) {
            const int M = f.nodes().size();
            Eigen::Map<const Eigen::VectorXd> u(f.nodes().sqrt_wv.data(), M);
            Vec x = y;
            for (int s = 0; s < f.slice_count(); ++s) {
                const cd proj = u.cast<cd>().dot(y.segment(static_cast<Eigen::Index>(s) * M, M));
                x.segment(static_cast<Eigen::Index>(s) * M, M) += (closed_[b][s] * proj) * u.cast<cd>();
            }
            X.segment(m.offset(b), n) = x;
        } else {
            DiagonalBlock phi(m.frames()[b], m.spec().g, m.z(), Representation::lattice);
            NeumannInverse inner;
            inner.size = n;
            inner.tol = tol_;
            inner.off = [&](const Vec& v) { return Vec(-phi.apply(v)); };
            inner.ratio = stats_.diag_ratio[b];
            inner.terms = stats_.diag_terms[b];
            X.segment(m.offset(b), n) = inner.apply(y);
        }
    }
    return X;
}

Vec LambdaInverse::apply(const Vec& Y) const { return outer_.apply(Y); }

LambdaInverse invert_lambda(const LambdaMatrix& m, double tol, bool force) { return LambdaInverse(m, tol, force); }

ThetaMatrix::ThetaMatrix(const SystemSpec& spec, std::vector<std::shared_ptr<const PairFrame>> frames, double z)
    : spec_(spec), frames_(std::move(frames)), z_(z) {
    require_negative(z);
    if (frames_.empty())
        throw ConfigError("Theta needs at least one pair frame");
    std::vector<Eigen::Index> sizes;
    for (const auto& f : frames_) {
        if (!(f->lab() == frames_[0]->lab()))
            throw DimensionMismatch("pair frames of one Theta must share the lab grid");
        sizes.push_back(f->slice_count());
    }
    offsets_ = block_offsets(sizes);
    R0_ = (frames_[0]->kinetic().array() - z).inverse();
    diag_.resize(size());
    for (int b = 0; b < block_count(); ++b)
        diag_.segment(offsets_[b], sizes[b]) = 1.0 - spec.g * frames_[b]->lattice_D(z).array();
}

Vec ThetaMatrix::apply_g(const Vec& c) const {
    Vec r = c.cwiseProduct(R0_.cast<cd>());
    Vec T(size());
    for (int b = 0; b < block_count(); ++b)
        T.segment(offsets_[b], frames_[b]->slice_count()) = frames_[b]->trace(r);
    return T;
}

Vec ThetaMatrix::apply_g_adjoint(const Vec& T) const {
    Vec c = Vec::Zero(R0_.size());
    for (int b = 0; b < block_count(); ++b)
        c += frames_[b]->trace_adjoint(T.segment(offsets_[b], frames_[b]->slice_count()));
    return c.cwiseProduct(R0_.cast<cd>());
}

Vec ThetaMatrix::apply(const Vec& T) const {
    Vec c = Vec::Zero(R0_.size());
    for (int b = 0; b < block_count(); ++b)
        c += frames_[b]->trace_adjoint(T.segment(offsets_[b], frames_[b]->slice_count()));
    c.array() *= R0_.cast<cd>().array();
    Vec out(size());
    for (int b = 0; b < block_count(); ++b)
        out.segment(offsets_[b], frames_[b]->slice_count()) = frames_[b]->trace(c);
    return T - spec_.g * out;
}

Vec ThetaMatrix::apply_adjoint(const Vec& T) const { return apply(T); }

Vec ThetaMatrix::apply_off(const Vec& T) const {
    if (block_count() == 1)
        return Vec::Zero(size());
    // tau_sigma R_0 tau_sigma^* is the multiplier D_sigma, so the diagonal part
    // of apply() is diag_ exactly.
    return apply(T) - diag_.cast<cd>().cwiseProduct(T);
}

NeumannInverse invert_theta(const ThetaMatrix& t, const SystemSpec& spec, double z, double tol, bool force) {
    if (!(tol > 0.0))
        throw ConfigError("Neumann tolerance must be positive");
    check_threshold(spec, z, force);
    const double worst = (1.0 - t.diagonal().array()).abs().maxCoeff();
    if (worst >= 1.0)
        throw SeriesDiverging(worst);
    NeumannInverse inv;
    inv.size = t.size();
    inv.tol = tol;
    Eigen::VectorXcd dinv = t.diagonal().cwiseInverse().cast<cd>();
    inv.diag_inverse = [dinv](const Vec& y) { return Vec(dinv.cwiseProduct(y)); };
    if (t.block_count() > 1) {
        inv.off = [&t](const Vec& x) { return t.apply_off(x); };
        inv.off_adjoint = inv.off;
        inv.ratio = measured_ratio(inv);
        if (inv.ratio >= 1.0)
            throw SeriesDiverging(inv.ratio);
        inv.terms = neumann_terms(inv.ratio, tol);
    }
    return inv;
}

std::optional<double> fit_order(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i)
        if (x[i] > 0.0 && y[i] > 0.0) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    if (lx.size() < 2)
        return std::nullopt;
    const double n = static_cast<double>(lx.size());
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    if (sxx == 0.0)
        return std::nullopt;
    return sxy / sxx;
}

BlockConvergenceReport verify_block_convergence(const SystemSpec& spec, const PairIndex& sigma,
                                                const std::optional<PairIndex>& nu, double z,
                                                const std::vector<double>& eps_list, const BumpProfile& bump) {
    require_negative(z);
    BlockConvergenceReport rep;
    rep.sigma = sigma;
    rep.nu = nu;
    rep.z = z;
    if (!nu) {
        // The |r - r'| kink of the kernel converges at second order in dr, so
        // use twice the smooth-integrand node count.
        const RNodes nodes = make_r_nodes(bump, 2 * required_r_nodes(bump, 0.0, 0.0));
        const std::vector<double> q_scan{0.0, 0.25 * std::abs(z), std::abs(z), 4 * std::abs(z), 16 * std::abs(z)};
        for (double eps : eps_list) {
            BlockConvergenceRow row;
            row.eps = eps;
            row.bound = diagonal_norm_bound(spec, z);
            for (double Q : q_scan) {
                DiagonalSlice e(sigma, spec.g, z, Q, eps, nodes), l(sigma, spec.g, z, Q, 0.0, nodes);
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e.kernel() - l.kernel(), Eigen::EigenvaluesOnly);
                row.distance = std::max(row.distance, es.eigenvalues().cwiseAbs().maxCoeff());
                row.block_norm = std::max(row.block_norm, e.norm());
            }
            rep.rows.push_back(row);
        }
    } else {
        for (double eps : eps_list) {
            MomentumSliceKernel ke(spec, sigma, *nu, z, eps, bump);
            SliceKernelOptions same;
            same.r_nodes = ke.r_count();
            MomentumSliceKernel kl(spec, sigma, *nu, z, 0.0, bump, {0.0, 0.0}, same);
            LinearMap diff{ke.size(), ke.size(), [&](const Vec& x) { return Vec(ke.apply(x) - kl.apply(x)); },
                           [&](const Vec& y) { return Vec(ke.apply_adjoint(y) - kl.apply_adjoint(y)); }};
            BlockConvergenceRow row;
            row.eps = eps;
            row.distance = operator_norm(diff).value;
            row.block_norm = ke.norm();
            row.bound = offdiagonal_norm_bound(spec, z);
            rep.rows.push_back(row);
        }
    }
    std::vector<double> e, d;
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        e.push_back(rep.rows[i].eps);
        d.push_back(rep.rows[i].distance);
        if (i > 0 && rep.rows[i].eps < rep.rows[i - 1].eps && !(d[i] < d[i - 1]))
            rep.decreasing = false;
    }
    rep.fitted_order = fit_order(e, d);
    return rep;
}

} // namespace contact
