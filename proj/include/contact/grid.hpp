#pragma once

#include "contact/model.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace contact {

using cd = std::complex<double>;
using Vec = Eigen::VectorXcd;

// Periodic box [0, L)^dim with N points per axis (N a power of two).
struct Grid {
    int dim = 1;
    double L = 1.0;
    int N = 2;

    static Grid make(int dim, double L, int N);

    double h() const { return L / N; }
    std::size_t size() const;
    double position(int k) const { return k * h(); }
    // Signed mode number of FFT index k, in [-N/2, N/2).
    int wave_index(int k) const { return k < N / 2 ? k : k - N; }
    // FFT index of signed mode number m (caller guarantees -N/2 <= m < N/2).
    int fft_index(int m) const { return m >= 0 ? m : m + N; }
    double momentum(int k) const;
    double dp() const;
    // Largest |p| on the grid.
    double p_max() const { return dp() * (N / 2); }

    bool operator==(const Grid& o) const { return dim == o.dim && L == o.L && N == o.N; }
};

// Row-major multi-index helpers (axis 0 varies slowest).
std::vector<int> unflatten(const Grid& g, std::size_t idx);
std::size_t flatten(const Grid& g, const std::vector<int>& k);

// Samples of a function on the grid, row-major over axes.
class GridField {
public:
    GridField() = default;
    explicit GridField(const Grid& g);
    GridField(const Grid& g, Vec values);

    static GridField from_function(const Grid& g, const std::function<cd(const std::vector<double>&)>& f);

    const Grid& grid() const { return grid_; }
    const Vec& values() const { return values_; }
    Vec& values() { return values_; }

    // L2 norm with the grid measure h^dim.
    double norm() const;
    cd inner(const GridField& other) const; // conjugate-linear in *this

private:
    Grid grid_;
    Vec values_;
};

// Unitary change of basis between grid samples and orthonormal Fourier
// coefficients c_p of psi(x) = sum_p c_p L^{-dim/2} e^{i p x}. Coefficients are
// stored in FFT order on the same multi-index layout, and sum |c|^2 equals the
// grid L2 norm squared.
Vec to_spectral(const GridField& psi);
GridField from_spectral(const Grid& g, const Vec& c);

// In-place unnormalized multidimensional DFT; sign -1 forward, +1 backward.
void fft(const Grid& g, cd* data, int sign);

// Sum_i p_i^2 / (2 m_i) at every mode, FFT order.
Eigen::VectorXd kinetic_symbol(const Grid& g, const std::vector<double>& masses);

GridField apply_free_hamiltonian(const GridField& psi, const SystemSpec& spec);

// Band-limited evaluation of psi at an arbitrary point (exact trigonometric
// interpolation from the spectral coefficients).
cd evaluate(const Grid& g, const Vec& spectral, const std::vector<double>& x);

// Flat binary container: dims, N (int64) and L (float64) little-endian, then
// interleaved re/im float64 values.
void write_binary(const GridField& psi, const std::string& path);
GridField read_binary(const std::string& path);

// CSV of a 1D or 2D slice. `fixed` gives the index of every axis not in
// `axes`; axes.size() must be 1 or 2.
void write_csv_slice(const GridField& psi, const std::string& path, const std::vector<int>& axes,
                     const std::vector<int>& fixed);

} // namespace contact
