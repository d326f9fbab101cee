#include "contact/grid.hpp"

#include "contact/errors.hpp"

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace contact {

Grid Grid::make(int dim, double L, int N) {
    if (dim < 1)
        throw DimensionMismatch("grid dimension must be positive");
    if (!(L > 0.0))
        throw ConfigError("box length must be positive");
    if (N < 2 || !std::has_single_bit(static_cast<unsigned>(N)))
        throw ConfigError("points per axis must be a power of two, got " + std::to_string(N));
    return Grid{dim, L, N};
}

std::size_t Grid::size() const {
    std::size_t s = 1;
    for (int a = 0; a < dim; ++a)
        s *= static_cast<std::size_t>(N);
    return s;
}

double Grid::momentum(int k) const { return dp() * wave_index(k); }
double Grid::dp() const { return 2.0 * std::numbers::pi / L; }

std::vector<int> unflatten(const Grid& g, std::size_t idx) {
    std::vector<int> k(g.dim);
    for (int a = g.dim - 1; a >= 0; --a) {
        k[a] = static_cast<int>(idx % g.N);
        idx /= g.N;
    }
    return k;
}

std::size_t flatten(const Grid& g, const std::vector<int>& k) {
    std::size_t idx = 0;
    for (int a = 0; a < g.dim; ++a)
        idx = idx * g.N + k[a];
    return idx;
}

GridField::GridField(const Grid& g) : grid_(g), values_(Vec::Zero(g.size())) {}

GridField::GridField(const Grid& g, Vec values) : grid_(g), values_(std::move(values)) {
    if (static_cast<std::size_t>(values_.size()) != g.size())
        throw DimensionMismatch("value count differs from grid size");
}

GridField GridField::from_function(const Grid& g, const std::function<cd(const std::vector<double>&)>& f) {
    GridField out(g);
    std::vector<double> x(g.dim);
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        auto k = unflatten(g, idx);
        for (int a = 0; a < g.dim; ++a)
            x[a] = g.position(k[a]);
        out.values_[idx] = f(x);
    }
    return out;
}

double GridField::norm() const { return std::sqrt(std::pow(grid_.h(), grid_.dim)) * values_.norm(); }

cd GridField::inner(const GridField& other) const {
    if (!(grid_ == other.grid_))
        throw DimensionMismatch("inner product of fields on different grids");
    return std::pow(grid_.h(), grid_.dim) * values_.dot(other.values_);
}

namespace {

struct PlanCache {
    std::mutex mu;
    std::map<std::tuple<int, int, int>, fftw_plan> plans;

    fftw_plan get(const Grid& g, int sign) {
        std::lock_guard<std::mutex> lock(mu);
        auto key = std::make_tuple(g.dim, g.N, sign);
        auto it = plans.find(key);
        if (it != plans.end())
            return it->second;
        std::vector<int> n(g.dim, g.N);
        std::vector<cd> scratch(g.size());
        auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan plan = fftw_plan_dft(g.dim, n.data(), p, p, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans[key] = plan;
        return plan;
    }
};

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

} // namespace

void fft(const Grid& g, cd* data, int sign) {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plan_cache().get(g, sign), p, p);
}

Vec to_spectral(const GridField& psi) {
    const Grid& g = psi.grid();
    Vec c = psi.values();
    fft(g, c.data(), -1);
    c *= std::pow(g.L, 0.5 * g.dim) / static_cast<double>(g.size());
    return c;
}

GridField from_spectral(const Grid& g, const Vec& c) {
    if (static_cast<std::size_t>(c.size()) != g.size())
        throw DimensionMismatch("coefficient count differs from grid size");
    Vec v = c;
    fft(g, v.data(), +1);
    v *= std::pow(g.L, -0.5 * g.dim);
    return GridField(g, std::move(v));
}

Eigen::VectorXd kinetic_symbol(const Grid& g, const std::vector<double>& masses) {
    if (static_cast<int>(masses.size()) != g.dim)
        throw DimensionMismatch("mass count differs from grid dimension");
    Eigen::VectorXd e(g.size());
    std::vector<double> p2(g.N);
    for (int k = 0; k < g.N; ++k)
        p2[k] = g.momentum(k) * g.momentum(k);
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        auto k = unflatten(g, idx);
        double s = 0.0;
        for (int a = 0; a < g.dim; ++a)
            s += p2[k[a]] / (2.0 * masses[a]);
        e[idx] = s;
    }
    return e;
}

GridField apply_free_hamiltonian(const GridField& psi, const SystemSpec& spec) {
    if (psi.grid().dim != spec.n)
        throw DimensionMismatch("field dimension " + std::to_string(psi.grid().dim) + " differs from n = " +
                                std::to_string(spec.n));
    Vec c = to_spectral(psi);
    c.array() *= kinetic_symbol(psi.grid(), spec.masses).array().cast<cd>();
    return from_spectral(psi.grid(), c);
}

cd evaluate(const Grid& g, const Vec& spectral, const std::vector<double>& x) {
    // Separable phases per axis, then one pass over the coefficients.
    std::vector<std::vector<cd>> ph(g.dim, std::vector<cd>(g.N));
    for (int a = 0; a < g.dim; ++a)
        for (int k = 0; k < g.N; ++k)
            ph[a][k] = std::polar(1.0, g.momentum(k) * x[a]);
    cd sum = 0.0;
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        auto k = unflatten(g, idx);
        cd t = spectral[idx];
        for (int a = 0; a < g.dim; ++a)
            t *= ph[a][k[a]];
        sum += t;
    }
    return sum * std::pow(g.L, -0.5 * g.dim);
}

namespace {

template <class T> void put(std::ofstream& f, T v) {
    static_assert(std::endian::native == std::endian::little, "binary format assumes a little-endian host");
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T> T get(std::ifstream& f) {
    T v{};
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!f)
        throw ConfigError("truncated grid field file");
    return v;
}

} // namespace

void write_binary(const GridField& psi, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw Error("cannot write '" + path + "'");
    const Grid& g = psi.grid();
    put<std::int64_t>(f, g.dim);
    put<std::int64_t>(f, g.N);
    put<double>(f, g.L);
    for (Eigen::Index i = 0; i < psi.values().size(); ++i) {
        put<double>(f, psi.values()[i].real());
        put<double>(f, psi.values()[i].imag());
    }
}

GridField read_binary(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw ConfigError("cannot open grid field file '" + path + "'");
    const auto dim = get<std::int64_t>(f);
    const auto N = get<std::int64_t>(f);
    const double L = get<double>(f);
    Grid g = Grid::make(static_cast<int>(dim), L, static_cast<int>(N));
    Vec v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double re = get<double>(f);
        const double im = get<double>(f);
        v[i] = cd(re, im);
    }
    return GridField(g, std::move(v));
}

void write_csv_slice(const GridField& psi, const std::string& path, const std::vector<int>& axes,
                     const std::vector<int>& fixed) {
    const Grid& g = psi.grid();
    if (axes.empty() || axes.size() > 2)
        throw DimensionMismatch("CSV slices are 1D or 2D");
    if (static_cast<int>(fixed.size()) != g.dim)
        throw DimensionMismatch("fixed index list must have one entry per axis");
    std::ofstream f(path);
    if (!f)
        throw Error("cannot write '" + path + "'");
    f.precision(17);
    std::vector<int> k = fixed;
    if (axes.size() == 1) {
        f << "x,re,im\n";
        for (int a = 0; a < g.N; ++a) {
            k[axes[0]] = a;
            const cd v = psi.values()[flatten(g, k)];
            f << g.position(a) << ',' << v.real() << ',' << v.imag() << '\n';
        }
    } else {
        f << "x,y,re,im\n";
        for (int a = 0; a < g.N; ++a)
            for (int b = 0; b < g.N; ++b) {
                k[axes[0]] = a;
                k[axes[1]] = b;
                const cd v = psi.values()[flatten(g, k)];
                f << g.position(a) << ',' << g.position(b) << ',' << v.real() << ',' << v.imag() << '\n';
            }
    }
}

} // namespace contact
