#include "contact/linalg.hpp"

#include "contact/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace contact {

Vec random_vector(Eigen::Index n, std::mt19937_64& rng, bool normalize) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double re = nd(rng);
        const double im = nd(rng);
        v[i] = cd(re, im);
    }
    if (normalize)
        v /= v.norm();
    return v;
}

NormEstimate operator_norm(const LinearMap& op, int iters, int restarts, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    NormEstimate best;
    for (int r = 0; r < std::max(restarts, 1); ++r) {
        Vec x = random_vector(op.cols, rng);
        double lam = 0.0, prev = 0.0;
        int it = 0;
        for (; it < iters; ++it) {
            Vec y = op.apply_adjoint(op.apply(x));
            const double ny = y.norm();
            prev = lam;
            lam = std::real(x.dot(y)); // Rayleigh quotient of op* op, x normalized
            if (ny == 0.0) {
                lam = 0.0;
                break;
            }
            x = y / ny;
        }
        const double value = std::sqrt(std::max(lam, 0.0));
        const double delta = std::abs(value - std::sqrt(std::max(prev, 0.0)));
        if (value > best.value)
            best.value = value;
        best.delta = std::max(best.delta, delta);
        best.iterations += it;
    }
    return best;
}

GmresResult gmres(const Apply& A, const Apply& precond, const Vec& b, double tol, int max_iter, int restart) {
    const Eigen::Index n = b.size();
    GmresResult res;
    res.x = Vec::Zero(n);
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        res.converged = true;
        return res;
    }
    auto M = [&](const Vec& v) { return precond ? precond(v) : v; };

    Vec r = b;
    double beta = bnorm;
    while (res.iterations < max_iter) {
        const int m = std::min(restart, max_iter - res.iterations);
        Eigen::MatrixXcd V(n, m + 1);
        Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(m + 1, m);
        std::vector<Eigen::JacobiRotation<cd>> rot(m);
        Vec g = Vec::Zero(m + 1);
        g[0] = beta;
        V.col(0) = r / beta;
        int j = 0;
        for (; j < m; ++j) {
            Vec w = A(M(V.col(j)));
            // Two passes of classical Gram-Schmidt keep the basis orthogonal.
            for (int pass = 0; pass < 2; ++pass) {
                Vec h = V.leftCols(j + 1).adjoint() * w;
                w -= V.leftCols(j + 1) * h;
                H.col(j).head(j + 1) += h;
            }
            H(j + 1, j) = w.norm();
            if (std::abs(H(j + 1, j)) > 0.0)
                V.col(j + 1) = w / H(j + 1, j);
            for (int i = 0; i < j; ++i)
                H.col(j).segment(i, 2).applyOnTheLeft(0, 1, rot[i].adjoint());
            rot[j].makeGivens(H(j, j), H(j + 1, j));
            H.col(j).segment(j, 2).applyOnTheLeft(0, 1, rot[j].adjoint());
            H(j + 1, j) = 0.0;
            g.segment(j, 2).applyOnTheLeft(0, 1, rot[j].adjoint());
            ++res.iterations;
            if (std::abs(g[j + 1]) <= tol * bnorm || std::abs(H(j, j)) == 0.0) {
                ++j;
                break;
            }
        }
        Vec y = H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
        res.x += M(V.leftCols(j) * y);
        r = b - A(res.x);
        beta = r.norm();
        res.residual = beta / bnorm;
        if (res.residual <= tol) {
            res.converged = true;
            return res;
        }
    }
    return res;
}

std::vector<double> lanczos_largest(const Apply& op, const Vec& start, int k, double rel_tol, int max_steps) {
    const Eigen::Index n = start.size();
    max_steps = static_cast<int>(std::min<Eigen::Index>(max_steps, n));
    k = std::min<int>(k, max_steps);
    Eigen::MatrixXcd Q(n, max_steps + 1);
    std::vector<double> alpha, beta;
    Q.col(0) = start / start.norm();
    double last_resid = 0.0;
    for (int j = 0; j < max_steps; ++j) {
        Vec w = op(Q.col(j));
        const double a = std::real(Q.col(j).dot(w));
        alpha.push_back(a);
        for (int pass = 0; pass < 2; ++pass)
            w -= Q.leftCols(j + 1) * (Q.leftCols(j + 1).adjoint() * w);
        const double b = w.norm();
        const int m = j + 1;
        if (m >= k) {
            Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
            for (int i = 0; i < m; ++i) {
                T(i, i) = alpha[i];
                if (i + 1 < m)
                    T(i, i + 1) = T(i + 1, i) = beta[i];
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
            bool ok = true;
            last_resid = 0.0;
            const double scale = std::max(std::abs(es.eigenvalues()[m - 1]), 1e-300);
            for (int i = 0; i < k; ++i) {
                const double resid = b * std::abs(es.eigenvectors()(m - 1, m - 1 - i));
                last_resid = std::max(last_resid, resid / scale);
                if (resid > rel_tol * scale)
                    ok = false;
            }
            if (ok || b < 1e-14 * scale || m == n) {
                std::vector<double> out;
                for (int i = 0; i < k; ++i)
                    out.push_back(es.eigenvalues()[m - 1 - i]);
                return out;
            }
        }
        beta.push_back(b);
        Q.col(j + 1) = w / b;
    }
    throw NoConvergence("Lanczos", max_steps, last_resid);
}

std::vector<double> lowest_from_shift_invert(const Apply& shifted_inverse, double shift, const Vec& start, int k,
                                             double rel_tol, int max_steps) {
    auto theta = lanczos_largest(shifted_inverse, start, k, rel_tol, max_steps);
    std::vector<double> out;
    for (double t : theta) {
        if (!(t > 0.0))
            throw ShiftTooCloseToSpectrum("shift-invert eigenvalue is not positive; shift is not below the spectrum");
        out.push_back(shift + 1.0 / t);
    }
    return out;
}

namespace {
std::atomic<int> g_threads{1};
}

void set_thread_count(int n) {
    g_threads = n > 0 ? n : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

int thread_count() { return g_threads; }

void parallel_for(int count, const std::function<void(int)>& body) {
    const int workers = std::min(thread_count(), count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i)
            body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++)
                body(i);
        });
    for (auto& t : pool)
        t.join();
}

} // namespace contact
