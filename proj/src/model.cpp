#include "contact/model.hpp"

#include "contact/errors.hpp"

#include <algorithm>
#include <cmath>

namespace contact {

namespace {

void check_common(int n, const std::vector<double>& masses) {
    if (n < 2)
        throw ConfigError("n must be at least 2, got " + std::to_string(n));
    if (static_cast<int>(masses.size()) != n)
        throw ConfigError("masses has " + std::to_string(masses.size()) + " entries but n = " +
                          std::to_string(n));
    for (double m : masses)
        if (!(m > 0.0) || !std::isfinite(m))
            throw ConfigError("masses must be finite and positive");
}

} // namespace

SystemSpec SystemSpec::make(int n, std::vector<double> masses, double g) {
    check_common(n, masses);
    if (g == 0.0 || !std::isfinite(g))
        throw ConfigError("coupling g must be finite and nonzero");
    return SystemSpec{n, std::move(masses), g};
}

SystemSpec SystemSpec::make_free(int n, std::vector<double> masses) {
    check_common(n, masses);
    return SystemSpec{n, std::move(masses), 0.0};
}

std::string PairIndex::label() const {
    return "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
}

PairIndex make_pair_index(const SystemSpec& spec, int i, int j) {
    if (i > j)
        std::swap(i, j);
    if (i < 0 || j >= spec.n || i == j)
        throw DimensionMismatch("invalid pair indices");
    const double mi = spec.masses[i], mj = spec.masses[j];
    return PairIndex{i, j, mi * mj / (mi + mj), mi + mj};
}

std::vector<PairIndex> enumerate_pairs(const SystemSpec& spec) {
    std::vector<PairIndex> out;
    out.reserve(spec.pair_count());
    for (int i = 0; i < spec.n; ++i)
        for (int j = i + 1; j < spec.n; ++j)
            out.push_back(make_pair_index(spec, i, j));
    return out;
}

PairCoordinates to_pair_frame(const std::vector<double>& x, const SystemSpec& spec, const PairIndex& s) {
    if (static_cast<int>(x.size()) != spec.n)
        throw DimensionMismatch("position vector length differs from n");
    PairCoordinates pc;
    pc.r = x[s.i] - x[s.j];
    pc.R = (spec.masses[s.i] * x[s.i] + spec.masses[s.j] * x[s.j]) / s.M;
    for (int k = 0; k < spec.n; ++k)
        if (!s.contains(k))
            pc.spectators.push_back(x[k]);
    return pc;
}

std::vector<double> from_pair_frame(const PairCoordinates& pc, const SystemSpec& spec, const PairIndex& s) {
    if (static_cast<int>(pc.spectators.size()) != spec.n - 2)
        throw DimensionMismatch("spectator count differs from n - 2");
    std::vector<double> x(spec.n);
    x[s.i] = pc.R + spec.masses[s.j] / s.M * pc.r;
    x[s.j] = pc.R - spec.masses[s.i] / s.M * pc.r;
    std::size_t q = 0;
    for (int k = 0; k < spec.n; ++k)
        if (!s.contains(k))
            x[k] = pc.spectators[q++];
    return x;
}

BoundConstants bound_constants(const SystemSpec& spec) {
    double mu_max = 0.0;
    for (const auto& p : enumerate_pairs(spec))
        mu_max = std::max(mu_max, p.mu);
    double k = 0.0;
    for (double m : spec.masses)
        k = std::max({k, std::pow(m, 1.5), m * m});
    BoundConstants bc;
    bc.c_frak = std::sqrt(mu_max / 2.0);
    bc.k_const = k;
    const double s = spec.n * (spec.n - 1) * k / 2.0 + bc.c_frak;
    bc.z0 = -spec.g * spec.g * s * s;
    return bc;
}

double diagonal_ratio_bound(const SystemSpec& spec, double z) {
    return bound_constants(spec).c_frak * std::abs(spec.g) / std::sqrt(std::abs(z));
}

double offdiagonal_ratio_bound(const SystemSpec& spec, double z) {
    const auto bc = bound_constants(spec);
    const double d = diagonal_ratio_bound(spec, z);
    return spec.pair_count() * bc.k_const * std::abs(spec.g) / std::sqrt(std::abs(z)) / (1.0 - d);
}

} // namespace contact
