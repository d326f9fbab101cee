#include "contact/forms.hpp"

#include "contact/errors.hpp"
#include "contact/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace contact {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<int> spectators(const SystemSpec& spec, const PairIndex& sigma) {
    std::vector<int> s;
    for (int k = 0; k < spec.n; ++k)
        if (!sigma.contains(k))
            s.push_back(k);
    return s;
}

void check_pair(const Grid& g, const SystemSpec& spec, const PairIndex& sigma) {
    if (g.dim != spec.n)
        throw DimensionMismatch("grid dimension differs from particle count");
    if (sigma.i < 0 || sigma.j >= spec.n || sigma.i >= sigma.j)
        throw DimensionMismatch("pair index outside the system");
}

double rel_residual(const Vec& a, const Vec& b) {
    const double scale = std::max(a.norm(), 1e-300);
    return (a - b).norm() / scale;
}

} // namespace

Grid reduced_grid(const Grid& lab) {
    if (lab.dim < 2)
        throw DimensionMismatch("the collision hyperplane needs at least two axes");
    return Grid::make(lab.dim - 1, lab.L, 2 * lab.N);
}

Vec trace_coefficients(const Grid& lab, const Vec& c, const SystemSpec& spec, const PairIndex& sigma) {
    check_pair(lab, spec, sigma);
    if (c.size() != static_cast<Eigen::Index>(lab.size()))
        throw DimensionMismatch("coefficient vector does not match the grid");
    const Grid red = reduced_grid(lab);
    const auto spect = spectators(spec, sigma);
    Vec T = Vec::Zero(static_cast<Eigen::Index>(red.size()));
    std::vector<int> rk(red.dim);
    for (std::size_t idx = 0; idx < lab.size(); ++idx) {
        const auto k = unflatten(lab, idx);
        rk[0] = red.fft_index(lab.wave_index(k[sigma.i]) + lab.wave_index(k[sigma.j]));
        for (std::size_t s = 0; s < spect.size(); ++s)
            rk[s + 1] = red.fft_index(lab.wave_index(k[spect[s]]));
        T[static_cast<Eigen::Index>(flatten(red, rk))] += c[static_cast<Eigen::Index>(idx)];
    }
    return T / std::sqrt(lab.L);
}

GridField apply_trace(const GridField& psi, const SystemSpec& spec, const PairIndex& sigma) {
    const Grid& g = psi.grid();
    return from_spectral(reduced_grid(g), trace_coefficients(g, to_spectral(psi), spec, sigma));
}

double h1_norm_sq(const GridField& psi) {
    const Grid& g = psi.grid();
    const Vec c = to_spectral(psi);
    double s = 0.0;
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        const auto k = unflatten(g, idx);
        double p2 = 0.0;
        for (int a = 0; a < g.dim; ++a)
            p2 += g.momentum(k[a]) * g.momentum(k[a]);
        s += (1.0 + p2) * std::norm(c[static_cast<Eigen::Index>(idx)]);
    }
    return s;
}

double relative_h1_norm_sq(const GridField& psi, const SystemSpec& spec, const PairIndex& sigma) {
    const Grid& g = psi.grid();
    check_pair(g, spec, sigma);
    const Vec c = to_spectral(psi);
    double s = 0.0;
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        const auto k = unflatten(g, idx);
        const double kr = relative_momentum(spec, sigma, g.momentum(k[sigma.i]), g.momentum(k[sigma.j]));
        s += (1.0 + kr * kr) * std::norm(c[static_cast<Eigen::Index>(idx)]);
    }
    return s;
}

bool TraceBoundCheck::pass() const {
    const double slack = 1e-12 * std::max(h1_sq, 1.0);
    return trace_sq <= relative_sq + slack && relative_sq <= h1_sq + slack;
}

TraceBoundCheck check_trace_bound(const GridField& psi, const SystemSpec& spec, const PairIndex& sigma) {
    if (psi.grid().L < 2.0)
        throw ConfigError("the lattice trace inequality needs L >= 2");
    TraceBoundCheck t;
    t.trace_sq = trace_coefficients(psi.grid(), to_spectral(psi), spec, sigma).squaredNorm();
    t.relative_sq = relative_h1_norm_sq(psi, spec, sigma);
    t.h1_sq = h1_norm_sq(psi);
    return t;
}

Vec continuum_dft(const Grid& g, const Vec& values, const std::vector<int>& axes) {
    if (values.size() != static_cast<Eigen::Index>(g.size()))
        throw DimensionMismatch("field does not match the grid");
    Vec out = values;
    const Grid line = Grid::make(1, g.L, g.N);
    std::vector<cd> buf(g.N);
    const double scale = g.h() / std::sqrt(kTwoPi);
    for (int axis : axes) {
        if (axis < 0 || axis >= g.dim)
            throw DimensionMismatch("transform axis outside the grid");
        std::size_t stride = 1;
        for (int a = axis + 1; a < g.dim; ++a)
            stride *= g.N;
        const std::size_t block = stride * g.N;
        for (std::size_t base = 0; base < g.size(); base += block)
            for (std::size_t off = 0; off < stride; ++off) {
                for (int k = 0; k < g.N; ++k)
                    buf[k] = out[static_cast<Eigen::Index>(base + off + k * stride)];
                fft(line, buf.data(), -1);
                for (int k = 0; k < g.N; ++k)
                    out[static_cast<Eigen::Index>(base + off + k * stride)] = scale * buf[k];
            }
    }
    return out;
}

Vec slice_at_origin(const Grid& g, const Vec& values) {
    if (values.size() != static_cast<Eigen::Index>(g.size()) || g.dim < 2)
        throw DimensionMismatch("slice needs a field on a grid of dimension >= 2");
    const auto rest = static_cast<Eigen::Index>(g.size() / g.N);
    return values.head(rest);
}

Vec fourier_trace(const Grid& g, const Vec& values) {
    if (values.size() != static_cast<Eigen::Index>(g.size()) || g.dim < 2)
        throw DimensionMismatch("Fourier trace needs a field on a grid of dimension >= 2");
    const auto rest = static_cast<Eigen::Index>(g.size() / g.N);
    Vec out = Vec::Zero(rest);
    for (int k = 0; k < g.N; ++k)
        out += values.segment(k * rest, rest);
    return out * (g.dp() / std::sqrt(kTwoPi));
}

double FourierTraceReport::worst() const { return std::max({residual[0], residual[1], residual[2]}); }

FourierTraceReport fourier_trace_identities(const GridField& xi) {
    const Grid& g = xi.grid();
    if (g.dim < 2)
        throw DimensionMismatch("Fourier trace identities need dimension >= 2");
    const Grid y = Grid::make(g.dim - 1, g.L, g.N);
    std::vector<int> y_axes, all_axes{0};
    for (int a = 1; a < g.dim; ++a) {
        y_axes.push_back(a);
        all_axes.push_back(a);
    }
    std::vector<int> y_own;
    for (int a = 0; a < y.dim; ++a)
        y_own.push_back(a);

    const Vec& v = xi.values();
    const Vec trace = slice_at_origin(g, v);
    const Vec f_trace = continuum_dft(y, trace, y_own);
    FourierTraceReport r;
    r.residual[0] = rel_residual(f_trace, slice_at_origin(g, continuum_dft(g, v, y_axes)));
    r.residual[1] = rel_residual(f_trace, fourier_trace(g, continuum_dft(g, v, all_axes)));
    r.residual[2] = rel_residual(trace, fourier_trace(g, continuum_dft(g, v, {0})));
    return r;
}

cd evaluate_form(const GridField& phi, const GridField& psi, const SystemSpec& spec) {
    const Grid& g = psi.grid();
    if (!(phi.grid() == g))
        throw DimensionMismatch("form arguments live on different grids");
    if (g.dim != spec.n)
        throw DimensionMismatch("grid dimension differs from particle count");
    const Vec a = to_spectral(phi);
    const Vec b = to_spectral(psi);
    const Eigen::VectorXd E = kinetic_symbol(g, spec.masses);
    cd t = a.dot(E.cast<cd>().cwiseProduct(b));
    for (const auto& sigma : enumerate_pairs(spec))
        t -= spec.g * trace_coefficients(g, a, spec, sigma).dot(trace_coefficients(g, b, spec, sigma));
    return t;
}

double FormOperatorCheck::relative_gap() const {
    return std::abs(extrapolated - form) / std::max(std::abs(form), 1e-300);
}

FormOperatorCheck form_vs_operator(const GridField& psi, const SystemSpec& spec, double eps, const BumpProfile& bump) {
    if (!(eps > 0.0))
        throw ConfigError("form-vs-operator needs eps > 0");
    const Vec c = to_spectral(psi);
    auto energy = [&](double e) {
        HamiltonianEps h(spec, e, psi.grid(), bump);
        return c.dot(h.apply(c)).real();
    };
    FormOperatorCheck r;
    r.form = form_value(psi, spec);
    r.at_eps = energy(eps);
    r.at_half = energy(0.5 * eps);
    r.extrapolated = (4.0 * r.at_half - r.at_eps) / 3.0;
    return r;
}

GridField random_band_limited(const Grid& g, int band, std::mt19937_64& rng) {
    if (band < 1 || band > g.N / 2)
        throw ConfigError("band must lie in [1, N/2]");
    std::normal_distribution<double> nd;
    Vec c = Vec::Zero(static_cast<Eigen::Index>(g.size()));
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        const auto k = unflatten(g, idx);
        bool inside = true;
        double p2 = 0.0;
        for (int a = 0; a < g.dim; ++a) {
            inside = inside && std::abs(g.wave_index(k[a])) < band;
            p2 += g.momentum(k[a]) * g.momentum(k[a]);
        }
        // Draw for every mode so the stream does not depend on the band.
        const cd z(nd(rng), nd(rng));
        if (inside)
            c[static_cast<Eigen::Index>(idx)] = z / (1.0 + p2);
    }
    c /= c.norm();
    return from_spectral(g, c);
}

bool FormSuiteReport::all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const FormCheckRow& r) { return r.pass; });
}

FormSuiteReport run_form_suite(const SystemSpec& spec, const Grid& grid, const FormSuiteOptions& opt) {
    if (grid.dim != spec.n)
        throw DimensionMismatch("grid dimension differs from particle count");
    std::mt19937_64 rng(opt.seed);
    const int band = std::max(1, grid.N / 4);
    const auto pairs = enumerate_pairs(spec);
    FormSuiteReport rep;

    // Trace inequalities.
    double worst_h1 = 0.0, worst_rel = 0.0;
    bool trace_ok = true;
    for (int t = 0; t < opt.trace_fields; ++t) {
        const GridField psi = random_band_limited(grid, band, rng);
        for (const auto& sigma : pairs) {
            const auto c = check_trace_bound(psi, spec, sigma);
            worst_h1 = std::max(worst_h1, c.trace_sq / c.h1_sq);
            worst_rel = std::max(worst_rel, c.trace_sq / c.relative_sq);
            trace_ok = trace_ok && c.pass();
        }
    }
    rep.rows.push_back({"trace_bound_h1", worst_h1, 1.0, trace_ok && worst_h1 <= 1.0});
    rep.rows.push_back({"trace_bound_relative", worst_rel, 1.0, trace_ok && worst_rel <= 1.0});

    // Fourier trace identities: a Gaussian product field centred on r = 0 and a
    // random field, both in pair coordinates (r on axis 0).
    const double L = grid.L;
    const GridField gauss = GridField::from_function(grid, [L](const std::vector<double>& x) {
        double s = 0.0;
        for (std::size_t a = 0; a < x.size(); ++a) {
            const double centre = a == 0 ? 0.0 : 0.5 * L;
            double d = x[a] - centre;
            d -= L * std::round(d / L);
            s += d * d * (1.0 + 0.5 * a);
        }
        return cd(std::exp(-s), 0.0);
    });
    const auto fg = fourier_trace_identities(gauss);
    const auto fr = fourier_trace_identities(random_band_limited(grid, grid.N / 2, rng));
    for (int k = 0; k < 3; ++k) {
        const std::string id = std::to_string(k + 1);
        rep.rows.push_back({"fourier_trace_" + id + "_gaussian", fg.residual[k], 1e-8, fg.residual[k] < 1e-8});
        rep.rows.push_back({"fourier_trace_" + id + "_random", fr.residual[k], 1e-6, fr.residual[k] < 1e-6});
    }

    // Hermiticity.
    double herm = 0.0;
    for (int t = 0; t < opt.hermiticity_pairs; ++t) {
        const GridField a = random_band_limited(grid, band, rng);
        const GridField b = random_band_limited(grid, band, rng);
        const cd ab = evaluate_form(a, b, spec);
        const cd ba = evaluate_form(b, a, spec);
        herm = std::max(herm, std::abs(ab - std::conj(ba)) / std::max(std::abs(ab), 1.0));
    }
    rep.rows.push_back({"form_hermiticity", herm, 1e-10, herm < 1e-10});

    // Positivity for repulsive coupling.
    SystemSpec repulsive = spec;
    repulsive.g = -std::abs(spec.g);
    double lowest = 1e300;
    for (int t = 0; t < opt.positivity_fields; ++t)
        lowest = std::min(lowest, form_value(random_band_limited(grid, band, rng), repulsive));
    rep.rows.push_back({"form_positivity_repulsive", lowest, 0.0, lowest >= 0.0});

    if (spec.n == 2 && spec.g > 0.0) {
        const double e0 = -pairs[0].mu * spec.g * spec.g / 2.0;
        double worst = 1e300;
        for (int t = 0; t < opt.positivity_fields; ++t) {
            const GridField psi = random_band_limited(grid, band, rng);
            worst = std::min(worst, form_value(psi, spec) / (psi.norm() * psi.norm()));
        }
        rep.rows.push_back({"form_lower_bound_witness", worst, e0, worst >= e0 - 1e-10});
    }

    // Form versus <psi, H_eps psi> on a smooth two-body field.
    const SystemSpec two = SystemSpec::make(2, {spec.masses[0], spec.masses[1]}, spec.g == 0.0 ? 1.0 : spec.g);
    const Grid g2 = Grid::make(2, grid.L, std::max(grid.N, 32));
    const double w = std::max(0.5, grid.L / 8.0);
    const GridField smooth = GridField::from_function(g2, [L, w](const std::vector<double>& x) {
        const double a = x[0] - 0.5 * L, b = x[1] - 0.45 * L;
        return cd(std::exp(-(a * a + 1.5 * b * b) / (2.0 * w * w)), 0.0);
    });
    const auto fo = form_vs_operator(smooth, two, opt.eps);
    rep.rows.push_back({"form_vs_operator", fo.relative_gap(), 0.01, fo.relative_gap() < 0.01});
    return rep;
}

} // namespace contact
