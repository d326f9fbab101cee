#pragma once

#include <string>
#include <vector>

namespace contact {

// n distinguishable particles on a line with masses m_i and a pairwise
// contact coupling g (attractive for g > 0). Units hbar = 1.
struct SystemSpec {
    int n = 2;
    std::vector<double> masses{1.0, 1.0};
    double g = 1.0;

    // Validates n >= 2, masses.size() == n, every m_i > 0 and g != 0.
    static SystemSpec make(int n, std::vector<double> masses, double g);
    // Same checks but allows g == 0, used for free-particle reference runs.
    static SystemSpec make_free(int n, std::vector<double> masses);

    int pair_count() const { return n * (n - 1) / 2; }
};

// Interacting pair (i, j), i < j, zero-based. label() prints one-based.
struct PairIndex {
    int i = 0;
    int j = 1;
    double mu = 0.5; // m_i m_j / (m_i + m_j)
    double M = 2.0;  // m_i + m_j

    std::string label() const;
    bool contains(int k) const { return k == i || k == j; }
    bool operator==(const PairIndex& o) const { return i == o.i && j == o.j; }
};

PairIndex make_pair_index(const SystemSpec& spec, int i, int j);

// Lexicographic in (i, j); this fixes the block layout of every pair-indexed
// operator in the library.
std::vector<PairIndex> enumerate_pairs(const SystemSpec& spec);

struct PairCoordinates {
    double r = 0.0; // x_i - x_j
    double R = 0.0; // (m_i x_i + m_j x_j) / M
    std::vector<double> spectators;
};

PairCoordinates to_pair_frame(const std::vector<double>& x, const SystemSpec& spec, const PairIndex& sigma);
std::vector<double> from_pair_frame(const PairCoordinates& pc, const SystemSpec& spec, const PairIndex& sigma);

// Relative momentum conjugate to r for lab momenta p_i, p_j.
inline double relative_momentum(const SystemSpec& spec, const PairIndex& s, double pi, double pj) {
    return (spec.masses[s.j] * pi - spec.masses[s.i] * pj) / s.M;
}

struct BoundConstants {
    double c_frak = 0.0;  // sqrt(max_sigma mu_sigma / 2), diagonal block bound per |g|/sqrt|z|
    double k_const = 0.0; // max(max m^{3/2}, max m^2), off-diagonal block bound per |g|/sqrt|z|
    double z0 = 0.0;      // -g^2 [n(n-1) K / 2 + c_frak]^2
};

BoundConstants bound_constants(const SystemSpec& spec);

// The two Neumann conditions that z < z0 is built to guarantee.
double diagonal_ratio_bound(const SystemSpec& spec, double z);
double offdiagonal_ratio_bound(const SystemSpec& spec, double z);

} // namespace contact
