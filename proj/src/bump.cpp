#include "contact/bump.hpp"

#include "contact/errors.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace contact {

namespace {

// Angular frequency (in units of 1/a) up to which the node rule resolves v^2.
constexpr double kOmegaBump = 240.0;
constexpr int kMinNodes = 8;

double unit_bump_sq(double t) {
    const double s = 1.0 - t * t;
    return s <= 0.0 ? 0.0 : std::exp(-2.0 / s);
}

} // namespace

BumpProfile BumpProfile::make(double support_radius) {
    if (!(support_radius > 0.0) || !std::isfinite(support_radius))
        throw ConfigError("bump support radius must be positive");
    boost::math::quadrature::tanh_sinh<double> ts;
    const double I = ts.integrate(unit_bump_sq, -1.0, 1.0, 1e-14);
    BumpProfile p;
    p.a_ = support_radius;
    p.c_ = 1.0 / std::sqrt(support_radius * I);
    return p;
}

double BumpProfile::v(double x) const {
    const double t = x / a_;
    const double s = 1.0 - t * t;
    return s <= 0.0 ? 0.0 : c_ * std::exp(-1.0 / s);
}

double ScaledPotential::integral() const {
    boost::math::quadrature::tanh_sinh<double> ts;
    const double b = eps * profile.support_radius();
    return ts.integrate([this](double x) { return (*this)(x); }, -b, b, 1e-14);
}

GridField dilate(const GridField& phi, double eps) {
    const Grid& g = phi.grid();
    if (g.dim != 1)
        throw DimensionMismatch("dilate acts on 1D fields");
    if (!(eps > 0.0))
        throw ConfigError("dilation scale must be positive");
    auto sym = [&](int k) { return g.wave_index(k) * g.h(); };
    const double total = phi.values().squaredNorm();
    if (eps < 1.0) {
        // Mass outside [-eps L/2, eps L/2) would be pushed out of the window.
        double outside = 0.0;
        for (int k = 0; k < g.N; ++k)
            if (std::abs(sym(k)) >= 0.5 * eps * g.L)
                outside += std::norm(phi.values()[k]);
        if (outside > 1e-14 * total)
            throw SupportEscapesBox("dilated field leaves the periodic window");
    }
    const Vec c = to_spectral(phi);
    GridField out(g);
    const double s = std::sqrt(eps);
    for (int k = 0; k < g.N; ++k) {
        const double x = eps * sym(k);
        if (std::abs(x) >= 0.5 * g.L)
            continue; // phi vanishes outside its window on the line
        out.values()[k] = s * evaluate(g, c, {x});
    }
    return out;
}

double RNodes::v_norm_sq() const {
    double s = 0.0;
    for (std::size_t a = 0; a < r.size(); ++a)
        s += sqrt_wv[a] * sqrt_wv[a];
    return s;
}

double RNodes::V_hat(double omega) const {
    double s = 0.0;
    for (std::size_t a = 0; a < r.size(); ++a)
        s += sqrt_wv[a] * sqrt_wv[a] * std::cos(omega * r[a]);
    return s;
}

int required_r_nodes(const BumpProfile& p, double eps, double dk_max) {
    const double a = p.support_radius();
    const double dr_max = 2.0 * std::numbers::pi / (kOmegaBump / a + eps * std::abs(dk_max));
    const int m = static_cast<int>(std::ceil(2.0 * a / dr_max)) - 1;
    return std::max(m, kMinNodes);
}

RNodes make_r_nodes(const BumpProfile& p, int count) {
    if (count < kMinNodes)
        throw UnresolvedBump("pair coordinate needs at least " + std::to_string(kMinNodes) + " nodes, got " +
                             std::to_string(count));
    const double a = p.support_radius();
    const double dr = 2.0 * a / (count + 1);
    RNodes n;
    for (int i = 0; i < count; ++i) {
        const double r = -a + (i + 1) * dr;
        n.r.push_back(r);
        n.w.push_back(dr);
        n.v.push_back(p.v(r));
        n.sqrt_wv.push_back(std::sqrt(dr) * p.v(r));
    }
    return n;
}

PairFrame::PairFrame(const SystemSpec& spec, const PairIndex& sigma, const Grid& lab, const BumpProfile& profile,
                     double eps, int r_nodes)
    : spec_(spec), sigma_(sigma), lab_(lab), eps_(eps) {
    if (lab.dim != spec.n)
        throw DimensionMismatch("lab grid dimension differs from particle count");
    if (eps < 0.0)
        throw ConfigError("eps must be non-negative");
    if (eps * profile.support_radius() >= 0.5 * lab.L)
        throw PotentialOverflowsBox("eps * a = " + std::to_string(eps * profile.support_radius()) +
                                    " does not fit in half the box L/2 = " + std::to_string(0.5 * lab.L));
    const int N = lab.N;
    const double dk_max = (N - 1) * lab.dp();
    const int need = required_r_nodes(profile, eps, dk_max);
    if (r_nodes > 0 && r_nodes < need)
        throw UnresolvedBump(std::to_string(r_nodes) + " pair-coordinate nodes requested but eps = " +
                             std::to_string(eps) + " on this grid needs " + std::to_string(need));
    nodes_ = make_r_nodes(profile, r_nodes > 0 ? r_nodes : need);

    int spect_count = 1;
    for (int k = 0; k < spec.n - 2; ++k)
        spect_count *= N;
    slices_ = (2 * N - 1) * spect_count;

    const std::size_t size = lab.size();
    slice_of_.resize(size);
    k_.resize(size);
    E_ = kinetic_symbol(lab, spec.masses);
    Q_.assign(slices_, 0.0);
    members_.assign(slices_, {});
    std::vector<int> wi(size);
    for (std::size_t idx = 0; idx < size; ++idx) {
        const auto k = unflatten(lab, idx);
        const int mi = lab.wave_index(k[sigma.i]);
        const int mj = lab.wave_index(k[sigma.j]);
        std::size_t sp = 0;
        double q = 0.0;
        for (int a = 0; a < spec.n; ++a) {
            if (sigma.contains(a))
                continue;
            sp = sp * N + k[a];
            const double pa = lab.momentum(k[a]);
            q += pa * pa / (2.0 * spec.masses[a]);
        }
        const int s = static_cast<int>((mi + mj + N) * spect_count + sp);
        const double P = (mi + mj) * lab.dp();
        slice_of_[idx] = s;
        k_[idx] = lab.dp() * mi - spec.masses[sigma.i] * P / sigma.M;
        Q_[s] = P * P / (2.0 * sigma.M) + q;
        members_[s].push_back(idx);
        wi[idx] = mi;
    }
    for (auto& m : members_)
        std::sort(m.begin(), m.end(), [&](std::size_t x, std::size_t y) { return wi[x] < wi[y]; });

    toeplitz_.resize(N);
    for (int d = 0; d < N; ++d)
        toeplitz_[d] = nodes_.V_hat(eps * lab.dp() * d) / lab.L;
}

int PairFrame::P_mode(int s) const {
    int spect_count = 1;
    for (int k = 0; k < spec_.n - 2; ++k)
        spect_count *= lab_.N;
    return s / spect_count - lab_.N;
}

std::vector<int> PairFrame::spectator_modes(int s) const {
    int rest = s;
    std::vector<int> out(spec_.n - 2);
    for (int k = spec_.n - 3; k >= 0; --k) {
        out[k] = lab_.wave_index(rest % lab_.N);
        rest /= lab_.N;
    }
    return out;
}

Vec PairFrame::apply_a(const Vec& c) const {
    const int M = nodes_.size();
    Vec X = Vec::Zero(chi_size());
    const double norm = 1.0 / std::sqrt(lab_.L);
    const double r0 = nodes_.r[0], dr = nodes_.dr();
    for (std::size_t idx = 0; idx < slice_of_.size(); ++idx) {
        const cd cp = c[idx] * norm;
        if (cp == 0.0)
            continue;
        const double theta = k_[idx] * eps_;
        cd ph = std::polar(1.0, theta * r0) * cp;
        const cd step = std::polar(1.0, theta * dr);
        cd* x = X.data() + static_cast<std::size_t>(slice_of_[idx]) * M;
        for (int a = 0; a < M; ++a) {
            x[a] += nodes_.sqrt_wv[a] * ph;
            ph *= step;
        }
    }
    return X;
}

Vec PairFrame::apply_a_adjoint(const Vec& X) const {
    const int M = nodes_.size();
    Vec c(static_cast<Eigen::Index>(slice_of_.size()));
    const double norm = 1.0 / std::sqrt(lab_.L);
    const double r0 = nodes_.r[0], dr = nodes_.dr();
    for (std::size_t idx = 0; idx < slice_of_.size(); ++idx) {
        const double theta = -k_[idx] * eps_;
        cd ph = std::polar(1.0, theta * r0);
        const cd step = std::polar(1.0, theta * dr);
        const cd* x = X.data() + static_cast<std::size_t>(slice_of_[idx]) * M;
        cd acc = 0.0;
        for (int a = 0; a < M; ++a) {
            acc += nodes_.sqrt_wv[a] * ph * x[a];
            ph *= step;
        }
        c[idx] = acc * norm;
    }
    return c;
}

Vec PairFrame::trace(const Vec& c) const {
    Vec T = Vec::Zero(slices_);
    for (std::size_t idx = 0; idx < slice_of_.size(); ++idx)
        T[slice_of_[idx]] += c[idx];
    return T / std::sqrt(lab_.L);
}

Vec PairFrame::trace_adjoint(const Vec& T) const {
    Vec c(static_cast<Eigen::Index>(slice_of_.size()));
    for (std::size_t idx = 0; idx < slice_of_.size(); ++idx)
        c[idx] = T[slice_of_[idx]];
    return c / std::sqrt(lab_.L);
}

Eigen::VectorXd PairFrame::lattice_D(double z) const {
    Eigen::VectorXd D = Eigen::VectorXd::Zero(slices_);
    for (std::size_t idx = 0; idx < slice_of_.size(); ++idx)
        D[slice_of_[idx]] += 1.0 / (E_[idx] - z);
    return D / lab_.L;
}

Vec PairFrame::apply_potential(const Vec& c) const {
    Vec out = Vec::Zero(c.size());
    std::vector<cd> buf;
    for (const auto& m : members_) {
        const int len = static_cast<int>(m.size());
        buf.resize(len);
        for (int b = 0; b < len; ++b)
            buf[b] = c[m[b]];
        for (int a = 0; a < len; ++a) {
            cd acc = toeplitz_[0] * buf[a];
            for (int b = 0; b < a; ++b)
                acc += toeplitz_[a - b] * buf[b];
            for (int b = a + 1; b < len; ++b)
                acc += toeplitz_[b - a] * buf[b];
            out[m[a]] = acc;
        }
    }
    return out;
}

Vec apply_a_eps(const GridField& psi, const SystemSpec& spec, const PairIndex& sigma, double eps,
                const BumpProfile& profile) {
    PairFrame f(spec, sigma, psi.grid(), profile, eps);
    return f.apply_a(to_spectral(psi));
}

} // namespace contact
