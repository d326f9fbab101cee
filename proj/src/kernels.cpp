#include "contact/kernels.hpp"

#include "contact/errors.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace contact {

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    if (n < 1)
        throw ConfigError("Gauss-Legendre needs at least one node");
    // Non-negative zeros, ascending; mirror them for the full rule.
    const auto zeros = boost::math::legendre_p_zeros<double>(n);
    x.clear();
    w.clear();
    auto weight = [n](double t) {
        const double d = boost::math::legendre_p_prime(n, t);
        return 2.0 / ((1.0 - t * t) * d * d);
    };
    for (auto it = zeros.rbegin(); it != zeros.rend(); ++it)
        if (*it > 0.0) {
            x.push_back(-*it);
            w.push_back(weight(*it));
        }
    for (double t : zeros) {
        x.push_back(t);
        w.push_back(weight(t));
    }
}

MomentumSliceKernel::MomentumSliceKernel(const SystemSpec& spec, const PairIndex& sigma, const PairIndex& nu, double z,
                                         double eps, const BumpProfile& bump, std::array<double, 2> conserved,
                                         const SliceKernelOptions& opt)
    : spec_(spec), sigma_(sigma), nu_(nu), overlap_(overlap_class(sigma, nu)), eps_(eps) {
    if (!(z < 0.0))
        throw ConfigError("spectral point must be negative");
    if (eps < 0.0)
        throw ConfigError("eps must be non-negative");
    if (overlap_ == OverlapClass::shared_particle && spec.n != 3)
        throw DimensionMismatch("shared-particle slice kernel is implemented for n = 3");
    if (overlap_ == OverlapClass::disjoint && spec.n != 4)
        throw DimensionMismatch("disjoint-pair slice kernel is implemented for n = 4");

    const double mmax = *std::max_element(spec.masses.begin(), spec.masses.end());
    const double c = opt.q_scale > 0.0 ? opt.q_scale : std::sqrt(2.0 * mmax * std::abs(z));
    std::vector<double> t, wt;
    gauss_legendre(opt.q_nodes, t, wt);
    const double h = 0.5 * std::numbers::pi;
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double th = h * t[k];
        const double cs = std::cos(th);
        q_.push_back(c * std::tan(th));
        wq_.push_back(c * h * wt[k] / (cs * cs));
    }

    // Lab momenta for output node i and input node j.
    int s0 = -1, b = -1, cc = -1;
    if (overlap_ == OverlapClass::shared_particle) {
        s0 = nu.contains(sigma.i) ? sigma.i : sigma.j;
        b = sigma.i == s0 ? sigma.j : sigma.i;
        cc = nu.i == s0 ? nu.j : nu.i;
    }
    auto lab = [&](double q_out, double q_in) {
        std::vector<double> p(spec.n, 0.0);
        if (overlap_ == OverlapClass::shared_particle) {
            p[b] = q_in;
            p[cc] = q_out;
            p[s0] = conserved[0] - q_in - q_out;
        } else {
            p[sigma.i] = q_in;
            p[sigma.j] = conserved[0] - q_in;
            p[nu.j] = q_out;
            p[nu.i] = conserved[1] - q_out;
        }
        return p;
    };

    const int nq = static_cast<int>(q_.size());
    kq_.resize(nq, nq);
    ks_.resize(nq, nq);
    kn_.resize(nq, nq);
    double kmax = 0.0;
    for (int i = 0; i < nq; ++i)
        for (int j = 0; j < nq; ++j) {
            const auto p = lab(q_[i], q_[j]);
            double E = 0.0;
            for (int a = 0; a < spec.n; ++a)
                E += p[a] * p[a] / (2.0 * spec.masses[a]);
            kq_(i, j) = std::sqrt(wq_[i] * wq_[j]) * (-spec.g / (2.0 * std::numbers::pi)) / (E - z);
            ks_(i, j) = relative_momentum(spec, sigma, p[sigma.i], p[sigma.j]);
            kn_(i, j) = relative_momentum(spec, nu, p[nu.i], p[nu.j]);
            kmax = std::max({kmax, std::abs(ks_(i, j)), std::abs(kn_(i, j))});
        }
    const int need = opt.r_nodes > 0 ? opt.r_nodes : std::min(required_r_nodes(bump, eps, 2.0 * kmax), opt.max_r_nodes);
    nodes_ = make_r_nodes(bump, need);
    M_ = nodes_.size();
}

Vec MomentumSliceKernel::apply(const Vec& x) const {
    const int nq = q_count();
    const auto& u = nodes_.sqrt_wv;
    Vec y = Vec::Zero(size());
    if (eps_ == 0.0) {
        Eigen::Map<const Eigen::VectorXd> uu(u.data(), M_);
        Vec proj(nq);
        for (int j = 0; j < nq; ++j)
            proj[j] = uu.cast<cd>().dot(x.segment(static_cast<Eigen::Index>(j) * M_, M_));
        Vec out = kq_.cast<cd>() * proj;
        for (int i = 0; i < nq; ++i)
            y.segment(static_cast<Eigen::Index>(i) * M_, M_) = out[i] * uu.cast<cd>();
        return y;
    }
    const double r0 = nodes_.r[0], dr = nodes_.dr();
    for (int i = 0; i < nq; ++i) {
        cd* yi = y.data() + static_cast<Eigen::Index>(i) * M_;
        for (int j = 0; j < nq; ++j) {
            const cd* xj = x.data() + static_cast<Eigen::Index>(j) * M_;
            // inner = sum_b u_b exp(-i eps k_nu r_b) x_b
            const double tn = -eps_ * kn_(i, j);
            cd ph = std::polar(1.0, tn * r0);
            const cd stn = std::polar(1.0, tn * dr);
            cd inner = 0.0;
            for (int a = 0; a < M_; ++a) {
                inner += u[a] * ph * xj[a];
                ph *= stn;
            }
            const cd coef = kq_(i, j) * inner;
            const double ts = eps_ * ks_(i, j);
            ph = std::polar(1.0, ts * r0);
            const cd sts = std::polar(1.0, ts * dr);
            for (int a = 0; a < M_; ++a) {
                yi[a] += u[a] * ph * coef;
                ph *= sts;
            }
        }
    }
    return y;
}

Vec MomentumSliceKernel::apply_adjoint(const Vec& y) const {
    const int nq = q_count();
    const auto& u = nodes_.sqrt_wv;
    Vec x = Vec::Zero(size());
    if (eps_ == 0.0) {
        Eigen::Map<const Eigen::VectorXd> uu(u.data(), M_);
        Vec proj(nq);
        for (int i = 0; i < nq; ++i)
            proj[i] = uu.cast<cd>().dot(y.segment(static_cast<Eigen::Index>(i) * M_, M_));
        Vec out = kq_.transpose().cast<cd>() * proj;
        for (int j = 0; j < nq; ++j)
            x.segment(static_cast<Eigen::Index>(j) * M_, M_) = out[j] * uu.cast<cd>();
        return x;
    }
    const double r0 = nodes_.r[0], dr = nodes_.dr();
    for (int j = 0; j < nq; ++j) {
        cd* xj = x.data() + static_cast<Eigen::Index>(j) * M_;
        for (int i = 0; i < nq; ++i) {
            const cd* yi = y.data() + static_cast<Eigen::Index>(i) * M_;
            const double ts = -eps_ * ks_(i, j);
            cd ph = std::polar(1.0, ts * r0);
            const cd sts = std::polar(1.0, ts * dr);
            cd inner = 0.0;
            for (int a = 0; a < M_; ++a) {
                inner += u[a] * ph * yi[a];
                ph *= sts;
            }
            const cd coef = kq_(i, j) * inner;
            const double tn = eps_ * kn_(i, j);
            ph = std::polar(1.0, tn * r0);
            const cd stn = std::polar(1.0, tn * dr);
            for (int a = 0; a < M_; ++a) {
                xj[a] += u[a] * ph * coef;
                ph *= stn;
            }
        }
    }
    return x;
}

LinearMap MomentumSliceKernel::map() const {
    return LinearMap{size(), size(), [this](const Vec& x) { return apply(x); },
                     [this](const Vec& y) { return apply_adjoint(y); }};
}

double MomentumSliceKernel::norm(int iters, int restarts) const {
    if (eps_ == 0.0) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(kq_);
        return nodes_.v_norm_sq() * svd.singularValues()(0);
    }
    return operator_norm(map(), iters, restarts).value;
}

} // namespace contact
