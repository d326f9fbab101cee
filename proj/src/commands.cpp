#include "contact/commands.hpp"

#include "contact/errors.hpp"
#include "contact/forms.hpp"
#include "contact/greens.hpp"
#include "contact/hamiltonian.hpp"
#include "contact/linalg.hpp"
#include "contact/report.hpp"
#include "contact/resolvent.hpp"
#include "contact/verify.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace contact {

namespace {

using nlohmann::json;

// Section -> accepted keys. Keys of [bounds] matching mass_set* are accepted
// separately. Bare keys (no section) are read as [system].
const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"", {"n", "masses", "g"}},
        {"system", {"n", "masses", "g"}},
        {"grid", {"L", "N"}},
        {"run", {"seed", "tol", "out"}},
        {"converge", {"eps_list", "z_list", "eps_mode", "limit_mode", "iterations", "restarts"}},
        {"spectrum", {"eps_list", "levels"}},
        {"bounds", {"couplings", "z_list", "eps_list", "mc_samples", "mc_batches"}},
        {"kernels", {"d_list", "z_list", "x_list"}},
        {"kk", {"z", "eps", "rhs"}},
        {"forms", {"trace_fields", "positivity_fields", "hermiticity_pairs", "eps"}},
    };
    return s;
}

void check_keys(const ConfigFile& cfg) {
    for (const auto& key : cfg.keys()) {
        const auto dot = key.find('.');
        const std::string section = dot == std::string::npos ? "" : key.substr(0, dot);
        const std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
        const auto it = schema().find(section);
        if (it == schema().end())
            throw ConfigError("unknown section [" + section + "]", cfg.line_of(key));
        if (section == "bounds" && name.rfind("mass_set", 0) == 0)
            continue;
        if (!it->second.count(name))
            throw ConfigError("unknown key '" + name + "' in [" + section + "]", cfg.line_of(key));
    }
}

int line_or_zero(const ConfigFile& cfg, const std::string& key) { return cfg.has(key) ? cfg.line_of(key) : 0; }

bool has_system(const ConfigFile& cfg) {
    for (const char* k : {"n", "masses", "g", "system.n", "system.masses", "system.g"})
        if (cfg.has(k))
            return true;
    return false;
}

SystemSpec system_of(const ConfigFile& cfg) {
    return has_system(cfg) ? system_from_config(cfg) : SystemSpec::make(2, {1.0, 1.0}, 1.0);
}

// Zipped (L, N) ladder; a scalar broadcasts against a list.
std::vector<Grid> grids_of(const ConfigFile& cfg, int dim, double L_default, int N_default) {
    const auto Ls = cfg.get_doubles("grid.L", {L_default});
    const auto Ns = cfg.get_ints("grid.N", {N_default});
    if (Ls.empty() || Ns.empty())
        throw ConfigError("grid.L and grid.N must be non-empty", line_or_zero(cfg, "grid.L"));
    if (Ls.size() != Ns.size() && Ls.size() != 1 && Ns.size() != 1)
        throw ConfigError("grid.L and grid.N lists differ in length", line_or_zero(cfg, "grid.N"));
    const std::size_t m = std::max(Ls.size(), Ns.size());
    std::vector<Grid> out;
    for (std::size_t i = 0; i < m; ++i) {
        const double L = Ls[Ls.size() == 1 ? 0 : i];
        const long long N = Ns[Ns.size() == 1 ? 0 : i];
        try {
            out.push_back(Grid::make(dim, L, static_cast<int>(N)));
        } catch (const ConfigError& e) {
            throw ConfigError(e.what(), line_or_zero(cfg, "grid.N"));
        }
    }
    return out;
}

std::vector<double> eps_list_of(const ConfigFile& cfg, const std::string& key, const std::vector<double>& fallback,
                                bool allow_zero) {
    const auto eps = cfg.get_doubles(key, fallback);
    const int line = line_or_zero(cfg, key);
    if (eps.empty())
        throw ConfigError(key + " is empty", line);
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0 || (allow_zero && eps[i] == 0.0)) || !std::isfinite(eps[i]))
            throw ConfigError(key + " entries must be " + (allow_zero ? "non-negative" : "positive"), line);
        if (i > 0 && !(eps[i] < eps[i - 1]))
            throw ConfigError(key + " must be strictly decreasing", line);
    }
    return eps;
}

std::vector<double> negative_list_of(const ConfigFile& cfg, const std::string& key,
                                     const std::vector<double>& fallback) {
    const auto zs = cfg.get_doubles(key, fallback);
    const int line = line_or_zero(cfg, key);
    if (zs.empty())
        throw ConfigError(key + " is empty", line);
    for (double z : zs)
        if (!(z < 0.0) || !std::isfinite(z))
            throw ConfigError(key + " entries must be finite and negative, got " + format_double(z), line);
    return zs;
}

void require_below_threshold(const SystemSpec& spec, const std::vector<double>& zs, int line, bool force) {
    if (force)
        return;
    const double z0 = bound_constants(spec).z0;
    for (double z : zs)
        if (!(z < z0))
            throw ConfigError("z = " + format_double(z) + " is not below z0 = " + format_double(z0) +
                                  " for this system (--force runs it as unsupported)",
                              line);
}

long long positive_int(const ConfigFile& cfg, const std::string& key, long long fallback) {
    const long long v = cfg.get_int(key, fallback);
    if (v < 1)
        throw ConfigError(key + " must be at least 1", line_or_zero(cfg, key));
    return v;
}

double positive_double(const ConfigFile& cfg, const std::string& key, double fallback) {
    const double v = cfg.get_double(key, fallback);
    if (!(v > 0.0) || !std::isfinite(v))
        throw ConfigError(key + " must be positive", line_or_zero(cfg, key));
    return v;
}

std::string verdict(bool pass) { return pass ? "PASS" : "FAIL"; }

std::string join(const std::vector<double>& xs, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i)
            out += sep;
        out += format_double(xs[i]);
    }
    return out;
}

std::string opt_str(const std::optional<double>& x) { return x ? format_double(*x) : ""; }

json spec_json(const SystemSpec& s) { return json{{"n", s.n}, {"masses", s.masses}, {"g", s.g}}; }

json grid_json(const Grid& g) { return json{{"dim", g.dim}, {"L", g.L}, {"N", g.N}}; }

// What a validated command does once the output directory exists.
struct Outcome {
    int code = kExitPass;
    std::string summary;
};
using Runner = std::function<Outcome(const ReportWriter&, json& body)>;

struct Context {
    const ConfigFile& cfg;
    const CliOptions& opt;
    std::uint64_t seed;
};

// ---------------------------------------------------------------- converge

Runner prepare_converge(const Context& c) {
    const SystemSpec spec = system_of(c.cfg);
    const auto grids = grids_of(c.cfg, spec.n, 8.0, 64);
    const auto eps = eps_list_of(c.cfg, "converge.eps_list", {0.4, 0.2, 0.1, 0.05}, false);
    const auto zs = negative_list_of(c.cfg, "converge.z_list", {-20.0});
    require_below_threshold(spec, zs, line_or_zero(c.cfg, "converge.z_list"), c.opt.force);

    SweepOptions so;
    so.tol = positive_double(c.cfg, "run.tol", 1e-10);
    so.iterations = static_cast<int>(positive_int(c.cfg, "converge.iterations", so.iterations));
    so.restarts = static_cast<int>(positive_int(c.cfg, "converge.restarts", so.restarts));
    so.seed = c.seed;
    so.force = c.opt.force;
    try {
        so.eps_mode = resolvent_mode_from_string(c.cfg.get_string("converge.eps_mode", "direct"));
        so.limit_mode = resolvent_mode_from_string(c.cfg.get_string("converge.limit_mode", "theta"));
    } catch (const ConfigError& e) {
        throw ConfigError(e.what(), line_or_zero(c.cfg, "converge.eps_mode"));
    }
    if (so.eps_mode != ResolventMode::direct && so.eps_mode != ResolventMode::konno_kuroda)
        throw ConfigError("eps_mode must be direct or konno_kuroda", line_or_zero(c.cfg, "converge.eps_mode"));
    if (so.limit_mode != ResolventMode::limit && so.limit_mode != ResolventMode::theta)
        throw ConfigError("limit_mode must be limit or theta", line_or_zero(c.cfg, "converge.limit_mode"));

    return [=](const ReportWriter& w, json& body) {
        const auto rep = convergence_sweep(spec, zs, eps, grids, BumpProfile::make(), so);
        CsvTable rows{{"L", "N", "z", "eps", "distance", "delta", "iterations"}, {}};
        json jrows = json::array();
        for (const auto& r : rep.rows) {
            rows.add({format_double(r.L), std::to_string(r.N), format_double(r.z), format_double(r.eps),
                      format_double(r.distance), format_double(r.delta), std::to_string(r.iterations)});
            jrows.push_back({{"L", r.L}, {"N", r.N}, {"z", r.z}, {"eps", r.eps}, {"distance", r.distance},
                             {"delta", r.delta}, {"iterations", r.iterations}, {"wallclock_ms", r.wallclock_ms}});
        }
        CsvTable series{{"L", "N", "z", "decreasing", "fitted_order"}, {}};
        json jseries = json::array();
        for (const auto& s : rep.series) {
            series.add({format_double(s.L), std::to_string(s.N), format_double(s.z), s.decreasing ? "yes" : "no",
                        opt_str(s.fitted_order)});
            jseries.push_back({{"L", s.L},
                               {"N", s.N},
                               {"z", s.z},
                               {"decreasing", s.decreasing},
                               {"fitted_order", s.fitted_order ? json(*s.fitted_order) : json(nullptr)}});
        }
        w.write("converge", rows);
        w.write("converge_series", series);
        body["system"] = spec_json(spec);
        body["eps_mode"] = to_string(so.eps_mode);
        body["limit_mode"] = to_string(so.limit_mode);
        body["rows"] = jrows;
        body["series"] = jseries;
        const bool ok = rep.all_decreasing();
        body["all_decreasing"] = ok;
        return Outcome{ok ? kExitPass : kExitAuditFail,
                       std::to_string(rep.rows.size()) + " rows, distances " +
                           (ok ? "strictly decreasing" : "NOT strictly decreasing")};
    };
}

// ---------------------------------------------------------------- spectrum

// Value at eps = 0 of the least-squares polynomial of degree min(2, m - 1).
double extrapolate_to_zero(const std::vector<double>& eps, const std::vector<double>& e) {
    const int m = static_cast<int>(eps.size());
    const int deg = std::min(2, m - 1);
    Eigen::MatrixXd A(m, deg + 1);
    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) {
        for (int k = 0; k <= deg; ++k)
            A(i, k) = std::pow(eps[i], k);
        b(i) = e[i];
    }
    return A.colPivHouseholderQr().solve(b)(0);
}

Runner prepare_spectrum(const Context& c) {
    const SystemSpec spec = system_of(c.cfg);
    const auto grids = grids_of(c.cfg, spec.n, 16.0, 256);
    const auto eps = eps_list_of(c.cfg, "spectrum.eps_list", {0.4, 0.2, 0.1}, false);
    const int levels = static_cast<int>(positive_int(c.cfg, "spectrum.levels", 1));
    const double tol = positive_double(c.cfg, "run.tol", 1e-10);
    const std::uint64_t seed = c.seed;

    return [=](const ReportWriter& w, json& body) {
        const BumpProfile bump = BumpProfile::make();
        EigenOptions eo;
        eo.zero_momentum_sector = true;
        eo.rel_tol = tol;
        eo.seed = seed;
        CsvTable rows{{"L", "N", "eps", "level", "energy"}, {}};
        CsvTable extrap{{"L", "N", "extrapolated", "reference", "relative_error"}, {}};
        json jrows = json::array(), jext = json::array();
        double min_energy = INFINITY;
        std::optional<double> finest_error;
        double finest = 0.0;

        double mu_max = 0.0;
        for (const auto& p : enumerate_pairs(spec))
            mu_max = std::max(mu_max, p.mu);
        // Bound state of a single attractive pair.
        const double two_body = -mu_max * spec.g * spec.g / 2.0;
        const bool has_reference = spec.n == 2 && spec.g > 0.0;

        for (const Grid& g : grids) {
            std::vector<double> e0;
            for (double e : eps) {
                const HamiltonianEps h(spec, e, g, bump);
                const auto ev = lowest_eigenvalues(h, levels, eo);
                for (std::size_t k = 0; k < ev.size(); ++k) {
                    rows.add({format_double(g.L), std::to_string(g.N), format_double(e), std::to_string(k),
                              format_double(ev[k])});
                    jrows.push_back({{"L", g.L}, {"N", g.N}, {"eps", e}, {"level", k}, {"energy", ev[k]}});
                    min_energy = std::min(min_energy, ev[k]);
                }
                e0.push_back(ev.front());
            }
            const double x = extrapolate_to_zero(eps, e0);
            finest = x;
            std::optional<double> err;
            if (has_reference)
                err = std::abs(x - two_body) / std::abs(two_body);
            finest_error = err;
            extrap.add({format_double(g.L), std::to_string(g.N), format_double(x),
                        has_reference ? format_double(two_body) : "", opt_str(err)});
            jext.push_back({{"L", g.L},
                            {"N", g.N},
                            {"extrapolated", x},
                            {"reference", has_reference ? json(two_body) : json(nullptr)},
                            {"relative_error", err ? json(*err) : json(nullptr)}});
        }
        w.write("spectrum", rows);
        w.write("spectrum_extrapolated", extrap);
        body["system"] = spec_json(spec);
        body["rows"] = jrows;
        body["extrapolated"] = jext;
        body["two_body_energy"] = two_body;
        body["below_two_body"] = finest < two_body;

        bool ok = true;
        std::string summary = "extrapolated E0 = " + format_double(finest);
        if (has_reference) {
            ok = *finest_error <= 0.02;
            summary += ", relative error " + format_double(*finest_error) + " against " + format_double(two_body);
        } else if (spec.g < 0.0) {
            ok = min_energy >= -1e-6;
            summary += ", lowest computed eigenvalue " + format_double(min_energy) + " (repulsive: must be >= -1e-6)";
        } else {
            summary += std::string(", ") + (finest < two_body ? "below" : "not below") +
                       " the single-pair energy " + format_double(two_body);
        }
        body["pass"] = ok;
        return Outcome{ok ? kExitPass : kExitAuditFail, summary};
    };
}

// ---------------------------------------------------------------- bounds

Runner prepare_bounds(const Context& c) {
    AuditSweepOptions so;
    std::vector<std::vector<double>> sets;
    for (const auto& key : c.cfg.keys()) {
        if (key.rfind("bounds.mass_set", 0) != 0)
            continue;
        const auto m = c.cfg.get_doubles(key);
        try {
            SystemSpec::make(static_cast<int>(m.size()), m, 1.0);
        } catch (const ConfigError& e) {
            throw ConfigError(e.what(), c.cfg.line_of(key));
        }
        sets.push_back(m);
    }
    if (!sets.empty())
        so.masses = sets;
    so.couplings = c.cfg.get_doubles("bounds.couplings", so.couplings);
    if (so.couplings.empty())
        throw ConfigError("bounds.couplings is empty", line_or_zero(c.cfg, "bounds.couplings"));
    for (double g : so.couplings)
        if (g == 0.0 || !std::isfinite(g))
            throw ConfigError("couplings must be finite and non-zero", line_or_zero(c.cfg, "bounds.couplings"));
    so.z_values = negative_list_of(c.cfg, "bounds.z_list", so.z_values);
    so.eps_values = eps_list_of(c.cfg, "bounds.eps_list", so.eps_values, true);
    so.mc_samples = positive_int(c.cfg, "bounds.mc_samples", so.mc_samples);
    so.mc_batches = static_cast<int>(positive_int(c.cfg, "bounds.mc_batches", so.mc_batches));
    if (so.mc_batches < 2 || so.mc_samples < so.mc_batches)
        throw ConfigError("need mc_batches >= 2 and mc_samples >= mc_batches", line_or_zero(c.cfg, "bounds.mc_batches"));
    so.seed = c.seed;

    return [=](const ReportWriter& w, json& body) {
        const auto audits = run_audit_sweep(so);
        CsvTable t{{"name", "masses", "g", "z", "eps", "claimed", "measured", "margin", "mc_ci", "route_gap", "seed",
                    "verdict"},
                   {}};
        json j = json::array();
        int fails = 0;
        for (const auto& a : audits) {
            t.add({a.name, join(a.masses, " "), opt_str(a.g), format_double(a.z), opt_str(a.eps),
                   format_double(a.claimed), format_double(a.measured), format_double(a.margin),
                   format_double(a.mc_ci), opt_str(a.route_gap), a.seed ? std::to_string(*a.seed) : "",
                   verdict(a.pass)});
            j.push_back({{"name", a.name},
                         {"masses", a.masses},
                         {"g", a.g ? json(*a.g) : json(nullptr)},
                         {"z", a.z},
                         {"eps", a.eps ? json(*a.eps) : json(nullptr)},
                         {"claimed", a.claimed},
                         {"measured", a.measured},
                         {"margin", a.margin},
                         {"mc_ci", a.mc_ci},
                         {"route_gap", a.route_gap ? json(*a.route_gap) : json(nullptr)},
                         {"seed", a.seed ? json(*a.seed) : json(nullptr)},
                         {"pass", a.pass}});
            fails += a.pass ? 0 : 1;
        }
        w.write("bounds", t);
        body["audits"] = j;
        body["all_pass"] = fails == 0;
        return Outcome{fails == 0 ? kExitPass : kExitAuditFail,
                       std::to_string(audits.size()) + " audits, " + std::to_string(fails) + " FAIL"};
    };
}

// ---------------------------------------------------------------- kernels

Runner prepare_kernels(const Context& c) {
    const auto ds = c.cfg.get_ints("kernels.d_list", {1, 3, 4});
    const auto zs = negative_list_of(c.cfg, "kernels.z_list", {-1.0});
    std::vector<double> lattice;
    for (int i = 1; i <= 20; ++i)
        lattice.push_back(0.05 * i);
    const auto xs = c.cfg.get_doubles("kernels.x_list", lattice);
    if (ds.empty() || xs.empty())
        throw ConfigError("kernels.d_list and kernels.x_list must be non-empty", line_or_zero(c.cfg, "kernels.d_list"));
    for (long long d : ds)
        if (d < 1 || d > 4)
            throw ConfigError("kernel dimensions must lie in 1..4", line_or_zero(c.cfg, "kernels.d_list"));
    for (double x : xs) {
        if (!(x >= 0.0) || !std::isfinite(x))
            throw ConfigError("kernels.x_list entries must be finite and non-negative", line_or_zero(c.cfg, "kernels.x_list"));
        if (x == 0.0 && *std::max_element(ds.begin(), ds.end()) >= 2)
            throw ConfigError("x = 0 is a singular point for d >= 2", line_or_zero(c.cfg, "kernels.x_list"));
    }
    constexpr double kTol = 1e-8;

    return [=](const ReportWriter& w, json& body) {
        CsvTable t{{"d", "z", "x", "closed_form", "quadrature", "relative_difference", "verdict"}, {}};
        json j = json::array();
        int fails = 0;
        for (long long d : ds)
            for (double z : zs)
                for (double x : xs) {
                    const double closed = greens_closed(static_cast<int>(d), z, x);
                    const double quad = greens_quadrature(static_cast<int>(d), z, x);
                    const double rel = std::abs(quad - closed) / std::abs(closed);
                    const bool ok = rel < kTol;
                    fails += ok ? 0 : 1;
                    t.add({std::to_string(d), format_double(z), format_double(x), format_double(closed),
                           format_double(quad), format_double(rel), verdict(ok)});
                    j.push_back({{"d", d}, {"z", z}, {"x", x}, {"closed_form", closed}, {"quadrature", quad},
                                 {"relative_difference", rel}, {"pass", ok}});
                }
        w.write("kernels", t);
        body["rows"] = j;
        body["tolerance"] = kTol;
        return Outcome{fails == 0 ? kExitPass : kExitAuditFail,
                       std::to_string(j.size()) + " kernel values, " + std::to_string(fails) + " beyond " +
                           format_double(kTol)};
    };
}

// ---------------------------------------------------------------- kk-check

Runner prepare_kk(const Context& c) {
    const SystemSpec spec = system_of(c.cfg);
    const Grid grid = grids_of(c.cfg, spec.n, 8.0, 64).front();
    if (grid.size() > kDenseLimit)
        throw ConfigError("kk-check needs a grid of at most " + std::to_string(kDenseLimit) +
                              " points for the dense reference",
                          line_or_zero(c.cfg, "grid.N"));
    const double z = c.cfg.get_double("kk.z", -16.0);
    if (!(z < 0.0))
        throw ConfigError("kk.z must be negative", line_or_zero(c.cfg, "kk.z"));
    require_below_threshold(spec, {z}, line_or_zero(c.cfg, "kk.z"), c.opt.force);
    const double eps = positive_double(c.cfg, "kk.eps", 0.25);
    const int rhs = static_cast<int>(positive_int(c.cfg, "kk.rhs", 10));
    const double tol = positive_double(c.cfg, "run.tol", 1e-12);
    const std::uint64_t seed = c.seed;
    const bool force = c.opt.force;
    constexpr double kTol = 1e-6;

    return [=](const ReportWriter& w, json& body) {
        const BumpProfile bump = BumpProfile::make();
        const HamiltonianEps h(spec, eps, grid, bump);
        ResolventOptions ro;
        ro.tol = tol;
        ro.force = force;
        const ResolventAssembly kk(spec, grid, bump, z, ResolventMode::konno_kuroda, eps, ro);
        std::mt19937_64 rng(seed);
        CsvTable t{{"rhs", "relative_deviation", "verdict"}, {}};
        json j = json::array();
        double worst = 0.0;
        for (int i = 0; i < rhs; ++i) {
            const Vec b = random_vector(static_cast<Eigen::Index>(grid.size()), rng);
            const Vec dense = solve_dense(h, z, b);
            const double dev = (kk.apply(b) - dense).norm() / dense.norm();
            worst = std::max(worst, dev);
            t.add({std::to_string(i), format_double(dev), verdict(dev < kTol)});
            j.push_back({{"rhs", i}, {"relative_deviation", dev}});
        }
        w.write("kk-check", t);
        body["system"] = spec_json(spec);
        body["grid"] = grid_json(grid);
        body["z"] = z;
        body["eps"] = eps;
        body["rows"] = j;
        body["max_relative_deviation"] = worst;
        const bool ok = worst < kTol;
        return Outcome{ok ? kExitPass : kExitAuditFail,
                       "max relative deviation " + format_double(worst) + " over " + std::to_string(rhs) +
                           " right-hand sides"};
    };
}

// ---------------------------------------------------------------- forms

Runner prepare_forms(const Context& c) {
    const SystemSpec spec = system_of(c.cfg);
    const Grid grid = grids_of(c.cfg, spec.n, 8.0, spec.n == 2 ? 32 : 8).front();
    if (grid.L < 2.0)
        throw ConfigError("forms needs grid.L >= 2 for the lattice trace inequality", line_or_zero(c.cfg, "grid.L"));
    FormSuiteOptions fo;
    fo.trace_fields = static_cast<int>(positive_int(c.cfg, "forms.trace_fields", fo.trace_fields));
    fo.positivity_fields = static_cast<int>(positive_int(c.cfg, "forms.positivity_fields", fo.positivity_fields));
    fo.hermiticity_pairs = static_cast<int>(positive_int(c.cfg, "forms.hermiticity_pairs", fo.hermiticity_pairs));
    fo.eps = positive_double(c.cfg, "forms.eps", fo.eps);
    fo.seed = c.seed;

    return [=](const ReportWriter& w, json& body) {
        const auto rep = run_form_suite(spec, grid, fo);
        CsvTable t{{"name", "measured", "threshold", "verdict"}, {}};
        json j = json::array();
        int fails = 0;
        for (const auto& r : rep.rows) {
            t.add({r.name, format_double(r.measured), format_double(r.threshold), verdict(r.pass)});
            j.push_back({{"name", r.name}, {"measured", r.measured}, {"threshold", r.threshold}, {"pass", r.pass}});
            fails += r.pass ? 0 : 1;
        }
        w.write("forms", t);
        body["system"] = spec_json(spec);
        body["grid"] = grid_json(grid);
        body["rows"] = j;
        return Outcome{fails == 0 ? kExitPass : kExitAuditFail,
                       std::to_string(rep.rows.size()) + " checks, " + std::to_string(fails) + " FAIL"};
    };
}

const std::map<std::string, std::function<Runner(const Context&)>>& registry() {
    static const std::map<std::string, std::function<Runner(const Context&)>> r{
        {"converge", prepare_converge}, {"spectrum", prepare_spectrum}, {"bounds", prepare_bounds},
        {"kernels", prepare_kernels},   {"kk-check", prepare_kk},       {"forms", prepare_forms},
    };
    return r;
}

std::filesystem::path out_dir_of(const CliOptions& opt, const ConfigFile& cfg) {
    if (opt.out_dir)
        return *opt.out_dir;
    if (const char* env = std::getenv(kOutDirEnv); env && *env)
        return env;
    return cfg.get_string("run.out", "out");
}

int run_parsed(const CliOptions& opt, const ConfigFile& cfg, std::ostream& out, std::ostream& err) {
    const auto it = registry().find(opt.command);
    if (it == registry().end()) {
        err << "error: unknown command '" << opt.command << "'\n";
        return kExitConfig;
    }
    RunMetadata meta;
    meta.command = opt.command;
    meta.config_path = opt.config_path.value_or("");
    meta.unsupported = opt.force;
    meta.started_utc = utc_now();

    Runner runner;
    std::filesystem::path dir;
    try {
        check_keys(cfg);
        const long long cfg_seed = cfg.get_int("run.seed", 1);
        if (cfg_seed < 0)
            throw ConfigError("run.seed must be non-negative", line_or_zero(cfg, "run.seed"));
        meta.seed = opt.seed.value_or(static_cast<std::uint64_t>(cfg_seed));
        if (opt.threads < 0)
            throw ConfigError("--threads must be non-negative");
        runner = it->second(Context{cfg, opt, meta.seed});
        dir = out_dir_of(opt, cfg);
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << "\n";
        const int code = exit_code_for(e);
        return code == kExitInternal ? kExitConfig : code;
    }

    try {
        set_thread_count(opt.threads);
        meta.threads = thread_count();
        if (opt.force)
            out << opt.command << ": --force given, results are labeled unsupported\n";
        const ReportWriter writer(dir);
        json body;
        body["command"] = opt.command;
        body["seed"] = meta.seed;
        body["unsupported"] = opt.force;
        const Outcome o = runner(writer, body);
        body["exit_code"] = o.code;
        writer.write(opt.command, body);
        meta.finished_utc = utc_now();
        writer.write_metadata(meta);
        out << opt.command << ": " << o.summary << " -> " << writer.dir().string() << "\n";
        return o.code;
    } catch (const std::exception& e) {
        err << opt.command << " failed: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

} // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"converge", "spectrum", "bounds", "kernels", "kk-check", "forms"};
    return names;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const AboveThreshold*>(&e) ||
        dynamic_cast<const UnresolvedBump*>(&e) || dynamic_cast<const SupportEscapesBox*>(&e) ||
        dynamic_cast<const PotentialOverflowsBox*>(&e) || dynamic_cast<const SingularAtOrigin*>(&e) ||
        dynamic_cast<const DimensionMismatch*>(&e))
        return kExitConfig;
    if (dynamic_cast<const NoConvergence*>(&e) || dynamic_cast<const SeriesDiverging*>(&e) ||
        dynamic_cast<const QuadratureFailure*>(&e) || dynamic_cast<const ShiftTooCloseToSpectrum*>(&e))
        return kExitNoConvergence;
    return kExitInternal;
}

int run_command_text(const CliOptions& opt, const std::string& config_text, std::ostream& out, std::ostream& err) {
    ConfigFile cfg;
    try {
        cfg = ConfigFile::parse(config_text);
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    return run_parsed(opt, cfg, out, err);
}

int run_command(const CliOptions& opt, std::ostream& out, std::ostream& err) {
    ConfigFile cfg;
    if (opt.config_path) {
        try {
            cfg = ConfigFile::load(*opt.config_path);
        } catch (const std::exception& e) {
            err << "config error: " << e.what() << "\n";
            return kExitConfig;
        }
    }
    return run_parsed(opt, cfg, out, err);
}

} // namespace contact
