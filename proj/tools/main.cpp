// rfsurface: one binary, one subcommand per experiment. Everything stochastic
// keys off --seed (or RF_SURFACE_SEED), so identical invocations produce
// byte-identical output; wall-clock metadata goes to a .meta sidecar only.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "rfsurface/disorder.hpp"
#include "rfsurface/elliptic.hpp"
#include "rfsurface/experiments.hpp"
#include "rfsurface/field.hpp"
#include "rfsurface/groundstate.hpp"
#include "rfsurface/io.hpp"
#include "rfsurface/ivgff.hpp"
#include "rfsurface/langevin.hpp"
#include "rfsurface/lattice.hpp"
#include "rfsurface/numerics.hpp"
#include "rfsurface/parabolic.hpp"
#include "rfsurface/potential.hpp"
#include "rfsurface/spectral.hpp"

namespace {

using namespace rfs;

constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitConfig = 2;

[[noreturn]] void config_error(const std::string& field, const std::string& why) {
    throw std::invalid_argument(field + ": " + why);
}

Potential parse_potential(const std::string& s) {
    try {
        return Potential::parse(s);
    } catch (const std::exception& e) {
        config_error("--potential", e.what());
    }
}

Distribution parse_distribution(const std::string& s) {
    try {
        return distribution_from_string(s);
    } catch (const std::exception& e) {
        config_error("--dist", e.what());
    }
}

double parse_beta(const std::string& s) {
    double b = 0.0;
    try {
        b = parse_double(s);
    } catch (const std::exception&) {
        config_error("--beta", "not a number (use e.g. 2.0 or inf)");
    }
    if (!(b > 0.0)) config_error("--beta", "must be positive (inf allowed)");
    return b;
}

void print_kv(const char* key, double value) {
    std::printf("%s = %s\n", key, format_double(value).c_str());
}
void print_kv(const char* key, const std::string& value) {
    std::printf("%s = %s\n", key, value.c_str());
}

// ---------------------------------------------------------------- green ----

struct GreenOpts {
    int d = 1, L = 8;
    std::int32_t site = -1;
    double tol = 1e-10;
    std::string out;
};

int run_green(const GreenOpts& o) {
    const Lattice lat(o.d, o.L);
    std::int32_t y = o.site < 0 ? lat.center() : o.site;
    if (y >= lat.n_sites() || !lat.is_interior(y))
        config_error("--site", "must be an interior site index");
    const Field g = green_column(lat, y, o.tol);
    print_kv("G(y,y)", g[y]);
    print_kv("trace_G", spectral::green_trace(o.d, o.L));
    print_kv("G2_center", spectral::green_power_center(o.d, o.L, 2));
    double colsum = 0.0;
    for (std::int32_t x : lat.interior_sites()) colsum += g[x];
    print_kv("column_sum", colsum);
    if (!o.out.empty()) write_field_csv(o.out, g, {o.d, o.L, "green_column", 0});
    return kExitOk;
}

// ----------------------------------------------------------- ground-state --

struct GroundStateOpts {
    int d = 1, L = 8;
    double lambda = 1.0;
    std::string potential = "quadratic:1.0";
    std::string dist = "gaussian";
    std::uint64_t seed = 1, realization = 0;
    bool integer = false;
    int band = 0;
    double tol = 1e-10;
    std::string out;
};

int run_ground_state(const GroundStateOpts& o) {
    const Lattice lat(o.d, o.L);
    const Potential pot = parse_potential(o.potential);
    const Distribution dist = parse_distribution(o.dist);
    const SeedSpec seed{o.seed, o.realization, Purpose::Generic};
    const Field eta = sample_iid_field(lat, dist, seed);

    if (o.integer) {
        if (o.d != 1) config_error("--integer", "the exact integer solver is d=1 only");
        const int band = o.band > 0 ? o.band : default_height_band(lat, eta, o.lambda);
        const auto res = solve_integer_ground_state_chain(lat, eta, o.lambda, band);
        print_kv("band", static_cast<double>(band));
        print_kv("energy_total", res.energy.total);
        print_kv("energy_elastic", res.energy.elastic);
        print_kv("phi_center", static_cast<double>(res.phi[lat.center()]));
        print_kv("certified", res.certified ? "true" : "false");
        if (!o.out.empty())
            write_field_csv(o.out, to_real(res.phi), {o.d, o.L, to_string(dist), o.seed});
        if (!res.certified) {
            std::fprintf(stderr, "ground state touches the height band; rerun with --band\n");
            return kExitNumerical;
        }
        return kExitOk;
    }

    const auto res = solve_real_ground_state(lat, pot, eta, o.lambda, o.tol);
    print_kv("energy_total", res.energy.total);
    print_kv("energy_elastic", res.energy.elastic);
    print_kv("energy_field", res.energy.field_coupling);
    print_kv("v_center", res.v[lat.center()]);
    print_kv("grad_norm_avg", grad_norm_sq(res.v) / lat.n_sites());
    print_kv("newton_iterations", static_cast<double>(res.report.iterations));
    print_kv("residual", res.report.residual);
    if (!o.out.empty()) write_field_csv(o.out, res.v, {o.d, o.L, to_string(dist), o.seed});
    if (!res.report.converged) {
        std::fprintf(stderr, "Newton did not converge\n");
        return kExitNumerical;
    }
    return kExitOk;
}

// --------------------------------------------------------------- langevin --

struct LangevinOpts {
    int d = 1, L = 8;
    double lambda = 1.0;
    std::string potential = "quadratic:1.0";
    std::string dist = "gaussian";
    double dt = -1.0, t_max = -1.0, burn_in = -1.0;
    int thin = 10;
    std::uint64_t seed = 1, realization = 0;
    bool coupled = false;
    std::int32_t resample_site = -1;
    std::string env_out;
};

int run_langevin(const LangevinOpts& o) {
    const Lattice lat(o.d, o.L);
    const Potential pot = parse_potential(o.potential);
    const Distribution dist = parse_distribution(o.dist);
    const double limit = stability_dt_limit(o.d, pot);
    const double dt = o.dt > 0.0 ? o.dt : default_dt(o.d, pot);
    if (dt > limit)
        config_error("--dt", "exceeds the explicit-Euler stability bound " + format_double(limit));
    const double burn = o.burn_in >= 0.0 ? o.burn_in : default_burn_in(o.L);
    const double t_max = o.t_max > 0.0 ? o.t_max : 3.0 * std::max(burn, 1.0);
    if (t_max <= burn) config_error("--t-max", "must exceed the burn-in " + format_double(burn));

    const SeedSpec seed{o.seed, o.realization, Purpose::Generic};
    const Field eta = sample_iid_field(lat, dist, seed);
    print_kv("dt", dt);
    print_kv("t_max", t_max);
    print_kv("burn_in", burn);

    if (o.coupled) {
        const std::int32_t site = o.resample_site < 0 ? lat.center() : o.resample_site;
        if (site >= lat.n_sites() || !lat.is_interior(site))
            config_error("--resample-site", "must be an interior site index");
        const Field eta_bar = resample_at(eta, site, dist, seed);
        const auto run = simulate_coupled(lat, pot, eta, eta_bar, o.lambda, dt, t_max,
                                          o.thin, seed);
        const auto& w = run.diff.states.back();
        double sup = 0.0, nrm = 0.0;
        for (double v : w) {
            sup = std::max(sup, std::abs(v));
            nrm += v * v;
        }
        print_kv("resample_site", static_cast<double>(site));
        print_kv("eta_shift", eta_bar[site] - eta[site]);
        print_kv("diff_sup_final", sup);
        print_kv("diff_norm_sq_final", nrm);
        print_kv("env_epochs", static_cast<double>(run.env.times.size()));
        double amin = run.env.c_plus, amax = run.env.c_minus;
        for (double a : run.env.a) {
            amin = std::min(amin, a);
            amax = std::max(amax, a);
        }
        print_kv("env_min", amin);
        print_kv("env_max", amax);
        const bool elliptic_ok =
            amin >= run.env.c_minus - 1e-12 && amax <= run.env.c_plus + 1e-12;
        print_kv("env_elliptic_ok", elliptic_ok ? "true" : "false");
        if (!o.env_out.empty()) write_environment_binary(o.env_out, run.env);
        return elliptic_ok ? kExitOk : kExitNumerical;
    }

    const auto traj = simulate(lat, pot, eta, o.lambda, dt, t_max, o.thin, seed);
    const auto m1 = estimate_site_moment(traj, lat.center(), 1, burn);
    const auto m2 = estimate_site_moment(traj, lat.center(), 2, burn);
    const auto gn = estimate_grad_norm_sq(traj, burn);
    print_kv("mean_center", m1.mean);
    print_kv("mean_center_se", m1.se);
    print_kv("second_center", m2.mean);
    print_kv("grad_norm_avg", gn.mean / lat.n_sites());
    print_kv("grad_norm_avg_se", gn.se / lat.n_sites());
    print_kv("n_samples", static_cast<double>(m1.n_effective));
    return kExitOk;
}

// ------------------------------------------------------------ heat-kernel --

struct HeatKernelOpts {
    int d = 1, L = 8;
    std::string env = "const:1.0";
    double c_minus = 1.0, c_plus = 2.0;
    double s = 0.0, t_max = 1.0, dt = -1.0, refresh = 0.1;
    std::int32_t source = -1;
    int thin = 1;
    std::uint64_t seed = 1;
};

int run_heat_kernel(const HeatKernelOpts& o) {
    const Lattice lat(o.d, o.L);
    const std::int32_t y = o.source < 0 ? lat.center() : o.source;
    if (y >= lat.n_sites() || !lat.is_interior(y))
        config_error("--source", "must be an interior site index");

    EnvFn env;
    double cm = o.c_minus, cp = o.c_plus;
    if (o.env.rfind("const:", 0) == 0) {
        const double a = parse_double(o.env.substr(6));
        if (!(a > 0.0)) config_error("--env", "constant conductance must be positive");
        env = constant_env(a);
        cm = cp = a;
    } else if (o.env == "random") {
        if (!(0.0 < cm && cm <= cp))
            config_error("--c-minus", "need 0 < c_minus <= c_plus");
        env = random_env(lat, cm, cp, o.refresh, SeedSpec{o.seed, 0, Purpose::Generic});
    } else if (o.env.rfind("file:", 0) == 0) {
        const TimeEnvironment rec = read_environment_binary(o.env.substr(5));
        if (rec.n_edges != lat.n_edges())
            config_error("--env", "environment record is for a different lattice");
        env = env_from_record(rec);
        cm = rec.c_minus;
        cp = rec.c_plus;
    } else {
        config_error("--env", "expected const:<a>, random, or file:<path>");
    }

    const double dt = o.dt > 0.0 ? o.dt : 0.05 / (2.0 * o.d * cp);
    const auto run = evolve_heat_kernel(lat, env, cm, cp, o.s, y, o.t_max, dt, o.thin);
    double mass = 0.0;
    for (double p : run.frames.back().p) mass += p;
    print_kv("dt", dt);
    print_kv("t_final", run.frames.back().t);
    print_kv("mass_final", mass);
    print_kv("min_value", run.min_value);
    print_kv("max_mass_step", run.max_mass_step);
    const auto na = check_nash_aronson(lat, run);
    print_kv("C0", na.C0);
    print_kv("c0", na.c0);
    print_kv("c0_lower", na.c0_lower);
    print_kv("c1", na.c1);
    print_kv("points_upper", static_cast<double>(na.n_points_upper));
    print_kv("points_lower", static_cast<double>(na.n_points_lower));
    if (run.min_value < 0.0 || run.max_mass_step > 1e-12) {
        std::fprintf(stderr, "positivity/mass conservation violated\n");
        return kExitNumerical;
    }
    return kExitOk;
}

// ------------------------------------------------------------------ ivgff --

struct IvgffOpts {
    int d = 1, L = 2;
    double lambda = 0.0;
    std::string beta = "1.0";
    std::string dist = "gaussian";
    int band = 0;
    long sweeps = 2000;
    int thin = 5;
    std::uint64_t seed = 1, realization = 0;
    bool exact = false;
    int max_sites = 6;  // `sets` subcommand
};

// eta references lat, so this must be constructed in place and never moved
struct IvgffSetup {
    Lattice lat;
    Field eta;
    double beta;
    int band;

    explicit IvgffSetup(const IvgffOpts& o)
        : lat(o.d, o.L),
          eta(sample_iid_field(lat, parse_distribution(o.dist),
                               SeedSpec{o.seed, o.realization, Purpose::Generic})),
          beta(parse_beta(o.beta)),
          band(o.band > 0 ? o.band : default_height_band(lat, eta, o.lambda, beta)) {
        if (std::isinf(beta)) config_error("--beta", "sampling needs a finite beta");
    }
    IvgffSetup(const IvgffSetup&) = delete;
    IvgffSetup& operator=(const IvgffSetup&) = delete;
};

void print_estimate(const char* key, const McEstimate& e) {
    std::printf("%s = %s +- %s\n", key, format_double(e.mean).c_str(),
                format_double(e.se).c_str());
}

int run_ivgff(const IvgffOpts& o) {
    const IvgffSetup st(o);
    const IVGibbsSpec spec{&st.lat, &st.eta, st.beta, o.lambda, st.band};
    print_kv("band", static_cast<double>(st.band));

    if (o.exact) {
        const auto res = exact_enumerate(spec);
        print_kv("n_configs", static_cast<double>(res.n_configs));
        print_kv("log_partition", res.log_partition);
        print_kv("height_mean", res.height_mean);
        print_kv("height_sq", res.height_sq);
        print_kv("zero_prob", res.zero_prob);
        print_kv("grad_norm_avg", res.grad_norm_avg);
        print_kv("log_exp_moment", res.log_exp_moment);
        print_kv("fitted_C", res.fitted_C);

        // gauge identity: log Z - (beta/2) lambda^2 |grad u|^2 = log gauge sum
        const auto [u, rep] = solve_dirichlet(st.lat, st.eta, {1e-12, 0});
        if (!rep.converged) return kExitNumerical;
        double gsq = 0.0;
        for (const auto& e : st.lat.edges()) {
            const double g = o.lambda * grad(u, e);
            gsq += g * g;
        }
        const double residual =
            std::abs(res.log_partition - 0.5 * st.beta * gsq - res.log_gauge_sum);
        print_kv("gauge_residual", residual);
        return kExitOk;
    }

    const auto run = metropolis_sample(spec, o.sweeps, o.thin, {o.seed, o.realization,
                                                                 Purpose::Generic});
    print_estimate("height_mean", run.height_mean);
    print_estimate("height_sq", run.height_sq);
    print_estimate("zero_prob", run.zero_prob);
    print_estimate("grad_norm_avg", run.grad_norm_avg);
    print_kv("acceptance_rate", run.acceptance_rate);
    print_kv("band_touch_rate", run.band_touch_rate);
    print_kv("band_flagged", run.band_flagged ? "true" : "false");
    if (run.band_flagged) {
        std::fprintf(stderr, "band saturated; rerun with a larger --band\n");
        return kExitNumerical;
    }
    return kExitOk;
}

int run_ivgff_peierls(const IvgffOpts& o) {
    const IvgffSetup st(o);
    const IVGibbsSpec spec{&st.lat, &st.eta, st.beta, o.lambda, st.band};
    PeierlsReport rep;
    if (o.exact) {
        rep = peierls_zero_probability_exact(spec);
    } else {
        const auto run = metropolis_sample(spec, o.sweeps, o.thin,
                                           {o.seed, o.realization, Purpose::Generic});
        if (run.band_flagged) {
            std::fprintf(stderr, "band saturated; rerun with a larger --band\n");
            return kExitNumerical;
        }
        rep = peierls_zero_probability(st.lat, st.lat.center(), run.samples);
    }
    print_estimate("zero_prob", rep.zero_prob);
    print_estimate("d_plus_prob", rep.d_plus_prob);
    print_estimate("d_minus_prob", rep.d_minus_prob);
    print_kv("one_minus_sum", 1.0 - rep.d_plus_prob.mean - rep.d_minus_prob.mean);
    print_kv("region_logic_ok", rep.region_logic_ok ? "true" : "false");
    return rep.region_logic_ok ? kExitOk : kExitNumerical;
}

int run_ivgff_sets(const IvgffOpts& o) {
    const Lattice lat(o.d, o.L);
    const Distribution dist = parse_distribution(o.dist);
    const Field eta =
        sample_iid_field(lat, dist, SeedSpec{o.seed, o.realization, Purpose::Generic});
    const auto fam = enumerate_connected_sets(lat, lat.center(), o.max_sites, eta, o.lambda);
    std::printf("count_by_size =");
    for (std::size_t k = 1; k < fam.count_by_size.size(); ++k)
        std::printf(" %ld", fam.count_by_size[k]);
    std::printf("\n");
    std::printf("count_by_boundary =");
    for (std::size_t k = 0; k < fam.count_by_boundary.size(); ++k)
        if (fam.count_by_boundary[k] > 0)
            std::printf(" %zu:%ld", k, fam.count_by_boundary[k]);
    std::printf("\n");
    print_kv("n_sets", static_cast<double>(fam.records.size()));
    print_kv("worst_margin", fam.worst_margin);
    print_kv("event_holds", fam.event_holds ? "true" : "false");
    return kExitOk;
}

// --------------------------------------------------------------- membrane --

struct MembraneOpts {
    int d = 1, L = 8;
    double lambda = 1.0;
    double tol = 1e-10;
};

int run_membrane(const MembraneOpts& o) {
    const Lattice lat(o.d, o.L);
    const double var_spectral =
        o.lambda * o.lambda * spectral::green_power_center(o.d, o.L, 4);

    Field delta(lat);
    delta[lat.center()] = 1.0;
    const auto [g1, r1] = solve_dirichlet(lat, delta, {o.tol, 0});
    const auto [g2, r2] = solve_dirichlet(lat, g1, {o.tol, 0});
    if (!r1.converged || !r2.converged) return kExitNumerical;
    const double var_cg = o.lambda * o.lambda * norm_sq_interior(g2);

    const auto [v, rm] = solve_membrane(lat, delta, {o.tol, 0});
    if (!rm.converged) return kExitNumerical;
    double max_diff = 0.0;
    for (std::int32_t x : lat.interior_sites())
        max_diff = std::max(max_diff, std::abs(v[x] - g2[x]));

    print_kv("height_var_spectral", var_spectral);
    print_kv("height_var_cg", var_cg);
    const double rel = std::abs(var_cg - var_spectral) / std::max(var_spectral, 1e-300);
    print_kv("relative_diff", rel);
    print_kv("bilaplacian_vs_nested_max_diff", max_diff);
    if (rel > 1e-6) {
        std::fprintf(stderr, "spectral and CG membrane variances disagree\n");
        return kExitNumerical;
    }
    return kExitOk;
}

// ---------------------------------------------------------------- scaling --

struct ScalingOpts {
    std::string observable = "height_var_real";
    int d = 1;
    std::vector<int> L_list;
    double lambda = 1.0;
    std::string beta = "inf";
    std::string dist = "gaussian";
    int n = 16;
    long sweeps = 5000;
    int thin = 5;
    int band = 0;
    bool exact = false;
    std::string model = "power";
    std::string out = "scaling.csv";
    std::string fit_out;
    std::string checkpoint;
    bool resume = false;
    int jobs = 1;
    std::uint64_t seed = 1;
};

FitModel parse_model(const std::string& s) {
    if (s == "power") return FitModel::power;
    if (s == "log-linear") return FitModel::log_linear;
    if (s == "constant") return FitModel::constant;
    config_error("--model", "expected power, log-linear, or constant");
}

int run_scaling(const ScalingOpts& o, const std::string& argv_line) {
    const auto t_start = std::chrono::steady_clock::now();
    Observable obs;
    try {
        obs = observable_from_string(o.observable);
    } catch (const std::exception& e) {
        config_error("--observable", e.what());
    }
    if (o.L_list.empty()) config_error("--L", "need at least one lattice size");
    for (std::size_t i = 1; i < o.L_list.size(); ++i)
        if (o.L_list[i] <= o.L_list[i - 1])
            config_error("--L", "sizes must be strictly increasing");
    const bool is_mc = obs == Observable::grad_norm_iv || obs == Observable::height_norm_iv;
    if (o.exact && is_mc)
        config_error("--exact", "Metropolis observables have no closed form");
    if (o.n < 2) config_error("--n", "need at least 2 realizations");
    if (o.jobs < 1) config_error("--jobs", "must be >= 1");

    SweepConfig cfg;
    cfg.d = o.d;
    cfg.observable = obs;
    cfg.lambda = o.lambda;
    cfg.beta = parse_beta(o.beta);
    cfg.dist = parse_distribution(o.dist);
    cfg.sweeps = o.sweeps;
    cfg.thin = o.thin;
    cfg.band = o.band;
    const SeedSpec seed{o.seed, 0, Purpose::Generic};

    // resume: any L already present in the checkpoint table is kept as-is
    std::vector<std::optional<ScalingRow>> rows(o.L_list.size());
    if (o.resume) {
        if (o.checkpoint.empty()) config_error("--resume", "needs --checkpoint");
        if (std::filesystem::exists(o.checkpoint)) {
            const ScalingTable done = read_scaling_csv(o.checkpoint);
            for (const auto& r : done.rows)
                for (std::size_t i = 0; i < o.L_list.size(); ++i)
                    if (r.L == o.L_list[i] && r.observable == obs && r.seed == o.seed)
                        rows[i] = r;
        }
    }

    std::mutex mu;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> any_failed{false};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= o.L_list.size()) return;
            if (rows[i].has_value()) continue;
            try {
                const Lattice lat(cfg.d, o.L_list[i]);
                const ScalingRow row = scaling_row(
                    cfg, lat, o.n, seed, static_cast<std::uint64_t>(i) * o.n);
                const std::lock_guard<std::mutex> lock(mu);
                rows[i] = row;
                if (!o.checkpoint.empty()) {
                    ScalingTable partial;
                    for (const auto& r : rows)
                        if (r.has_value()) partial.rows.push_back(*r);
                    const std::string tmp = o.checkpoint + ".tmp";
                    write_scaling_csv(tmp, partial);
                    std::filesystem::rename(tmp, o.checkpoint);
                }
            } catch (const std::exception& e) {
                const std::lock_guard<std::mutex> lock(mu);
                any_failed = true;
                std::fprintf(stderr, "scaling: dropping L=%d: %s\n", o.L_list[i], e.what());
            }
        }
    };
    if (o.jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < o.jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    ScalingTable table;
    for (const auto& r : rows)
        if (r.has_value()) table.rows.push_back(*r);
    table.validate();
    write_scaling_csv(o.out, table);
    std::fputs(scaling_table_csv(table).c_str(), stdout);

    if (table.rows.size() >= 4) {
        const ExponentFit fit = fit_exponent(table, parse_model(o.model));
        const std::string json = exponent_fit_json(fit);
        std::string fit_path = o.fit_out;
        if (fit_path.empty()) fit_path = o.out + ".fit.json";
        std::ofstream os(fit_path, std::ios::binary);
        os << json;
        std::fputs(json.c_str(), stdout);
    } else {
        std::fprintf(stderr, "scaling: %zu rows, skipping exponent fit (need 4)\n",
                     table.rows.size());
    }

    // timestamps live here so the CSV/JSON stay byte-identical across reruns
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    std::ofstream meta(o.out + ".meta", std::ios::binary);
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[64];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    meta << "finished = " << stamp << "\nwall_seconds = " << format_double(secs)
         << "\nargv = " << argv_line << "\n";

    return any_failed ? kExitNumerical : kExitOk;
}

// ------------------------------------------------------------ efron-stein --

struct EfronSteinOpts {
    int d = 2, L = 8;
    double lambda = 1.0;
    std::string potential = "qsqrt:1.0";
    std::string dist = "gaussian";
    int n = 64;
    std::uint64_t seed = 1;
    bool linear = false;
};

int run_efron_stein(const EfronSteinOpts& o) {
    const Lattice lat(o.d, o.L);
    if (o.linear) {
        const auto rep = efron_stein_linear_exact(lat);
        print_kv("variance", rep.variance);
        print_kv("bound", rep.bound);
        const double diff = std::abs(rep.bound - rep.variance);
        print_kv("abs_diff", diff);
        return diff <= 1e-10 ? kExitOk : kExitNumerical;
    }
    const Potential pot = parse_potential(o.potential);
    const Distribution dist = parse_distribution(o.dist);
    const auto rep = efron_stein_mc(lat, pot, o.lambda, dist, o.n,
                                    SeedSpec{o.seed, 0, Purpose::Generic});
    print_kv("variance", rep.variance);
    print_kv("variance_se", rep.variance_se);
    print_kv("bound", rep.bound);
    print_kv("bound_se", rep.bound_se);
    const double sigma =
        std::sqrt(rep.variance_se * rep.variance_se + rep.bound_se * rep.bound_se);
    const double slack = (rep.bound - rep.variance) / std::max(sigma, 1e-300);
    print_kv("slack_sigma", slack);
    if (slack < -3.0) {
        std::fprintf(stderr, "Efron-Stein bound violated beyond 3 sigma\n");
        return kExitNumerical;
    }
    return kExitOk;
}

// --------------------------------------------------------------- selftest --

int run_selftest() {
    int failures = 0;
    auto check = [&](const char* name, bool ok) {
        std::printf("%-44s %s\n", name, ok ? "PASS" : "FAIL");
        if (!ok) ++failures;
    };

    {  // Green column on the 3-interior-site chain, against hand values
        const Lattice lat(1, 1);
        const Field g = green_column(lat, lat.center(), 1e-12);
        const auto in = lat.interior_sites();
        const bool ok = std::abs(g[in[0]] - 0.5) < 1e-10 &&
                        std::abs(g[in[1]] - 1.0) < 1e-10 &&
                        std::abs(g[in[2]] - 0.5) < 1e-10;
        check("green column d=1 L=1", ok);
        check("green (G^2)(0,0) = 3/2",
              std::abs(spectral::green_power_center(1, 1, 2) - 1.5) < 1e-12);
    }
    {  // path-graph trace identity sum G(i,i) = n(n+2)/6
        const int L = 4, n = 2 * L + 1;
        check("spectral trace identity d=1",
              std::abs(spectral::green_trace(1, L) - n * (n + 2) / 6.0) < 1e-10);
    }
    {  // chain DP agrees with exhaustive enumeration
        const Lattice lat(1, 1);
        Field eta(lat);
        const auto in = lat.interior_sites();
        eta[in[0]] = 0.4;
        eta[in[1]] = -1.3;
        eta[in[2]] = 0.9;
        const int band = 3;
        const auto dp = solve_integer_ground_state_chain(lat, eta, 1.0, band);
        double best = 1e300;
        IVGibbsSpec spec{&lat, &eta, 1.0, 1.0, band};
        const std::vector<int> zero(static_cast<std::size_t>(lat.n_interior()), 0);
        for_each_config(lat, band, zero, [&](std::span<const int> h) {
            IntField phi(lat);
            for (std::size_t k = 0; k < h.size(); ++k) phi[in[k]] = h[k];
            best = std::min(best, iv_energy(spec, phi));
        });
        check("chain DP equals exhaustive minimum",
              dp.certified && std::abs(dp.energy.total - best) < 1e-12);
    }
    {  // law of total variance is an algebraic identity on the estimators
        ThermalMeanConfig cfg;
        cfg.d = 1;
        cfg.L = 2;
        const auto dec = total_variance_decomposition(cfg, 8, SeedSpec{7, 0, Purpose::Generic});
        check("variance decomposition identity",
              std::abs(dec.thermal + dec.disorder - dec.total) < 1e-10);
    }
    {  // Efron-Stein equality for the linear estimator
        const auto rep = efron_stein_linear_exact(Lattice(1, 1));
        check("Efron-Stein linear equality (= 3/2)",
              std::abs(rep.variance - 1.5) < 1e-10 && std::abs(rep.bound - 1.5) < 1e-10);
    }
    {  // pyramid shape in d=1, L=8
        const Lattice lat(1, 8);
        const IntField p = pyramid_test_function(lat, lat.center());
        int peak = 0, max_grad = 0;
        for (std::int32_t x = 0; x < p.size(); ++x) peak = std::max(peak, p[x]);
        for (const auto& e : lat.edges()) max_grad = std::max(max_grad, std::abs(grad(p, e)));
        check("pyramid peak/gradient d=1 L=8", peak == 4 && max_grad == 2);
    }
    {  // connected-set counts in Z^2
        const Lattice lat(2, 2);
        const Field eta(lat);
        const auto fam = enumerate_connected_sets(lat, lat.center(), 3, eta, 0.0);
        const bool ok = fam.count_by_size.size() > 3 && fam.count_by_size[1] == 1 &&
                        fam.count_by_size[2] == 4 && fam.count_by_size[3] == 18;
        check("connected-set counts 1/4/18", ok);
    }
    {  // gauge identity at small size
        const Lattice lat(1, 1);
        Field eta(lat);
        const auto in = lat.interior_sites();
        eta[in[0]] = 1.1;
        eta[in[1]] = -0.3;
        eta[in[2]] = 0.6;
        const IVGibbsSpec spec{&lat, &eta, 1.25, 0.7, 6};
        const auto res = exact_enumerate(spec, false);
        const auto [u, rep] = solve_dirichlet(lat, eta, {1e-13, 0});
        double gsq = 0.0;
        for (const auto& e : lat.edges()) {
            const double g = 0.7 * grad(u, e);
            gsq += g * g;
        }
        const double residual =
            std::abs(res.log_partition - 0.5 * 1.25 * gsq - res.log_gauge_sum);
        check("gauge identity residual < 1e-8", rep.converged && residual < 1e-8);
    }
    {  // heat kernel positivity and mass monotonicity
        const Lattice lat(1, 4);
        const auto run = evolve_heat_kernel(lat, constant_env(1.0), 1.0, 1.0, 0.0,
                                            lat.center(), 2.0, 0.04, 5);
        double mass = 0.0;
        for (double p : run.frames.back().p) mass += p;
        check("heat kernel positivity + mass",
              run.min_value >= 0.0 && run.max_mass_step <= 1e-12 && mass <= 1.0 + 1e-12);
    }
    {  // Metropolis determinism
        const Lattice lat(1, 2);
        Field eta(lat);
        for (std::int32_t x : lat.interior_sites()) eta[x] = 0.25;
        const IVGibbsSpec spec{&lat, &eta, 2.0, 1.0, 3};
        const auto a = metropolis_sample(spec, 200, 5, SeedSpec{11, 0, Purpose::Generic});
        const auto b = metropolis_sample(spec, 200, 5, SeedSpec{11, 0, Purpose::Generic});
        check("metropolis determinism",
              a.height_mean.mean == b.height_mean.mean && a.height_sq.mean == b.height_sq.mean);
    }
    {  // CSV round trip
        ScalingTable t;
        ScalingRow r;
        r.d = 1;
        r.L = 4;
        r.estimate = 1.0 / 3.0;
        r.std_error = 1e-3;
        r.n = 5;
        r.seed = 9;
        t.rows.push_back(r);
        const std::string path = "selftest_roundtrip.csv";
        write_scaling_csv(path, t);
        const ScalingTable back = read_scaling_csv(path);
        std::filesystem::remove(path);
        check("scaling CSV round trip",
              scaling_table_csv(back) == scaling_table_csv(t));
    }

    std::printf("%d failure(s)\n", failures);
    return failures == 0 ? kExitOk : kExitNumerical;
}

// CLI11 only folds a config file into options owned by the app that called
// set_config, and every option here lives on a subcommand, so the flat
// key=value file is expanded into argv by hand. Keys already present as
// flags are dropped: flags win.
std::vector<std::string> with_config_expanded(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            break;
        }
    }
    if (path.empty()) return args;
    std::ifstream in(path);
    if (!in) throw CLI::FileError::Missing(path);
    const auto trim = [](const std::string& s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const auto given = [&args](const std::string& key) {
        const std::string opt = "--" + key;
        for (const auto& t : args)
            if (t == opt || t.rfind(opt + "=", 0) == 0) return true;
        return false;
    };
    std::string line;
    for (int ln = 1; std::getline(in, line); ++ln) {
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        const auto eq = s.find('=');
        if (s[0] == '[' || eq == std::string::npos || eq == 0)
            throw CLI::FileError(path + ":" + std::to_string(ln) + ": expected key=value");
        const std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
            value.back() == value.front())
            value = value.substr(1, value.size() - 2);
        if (!given(key)) args.push_back("--" + key + "=" + value);
    }
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"random-field surface simulations"};
    app.require_subcommand(1);

    std::string argv_line;
    for (int i = 0; i < argc; ++i) {
        if (i) argv_line += ' ';
        argv_line += argv[i];
    }

    auto add_seed = [](CLI::App* sub, std::uint64_t& target) {
        sub->add_option("--seed", target, "base RNG seed")->envname("RF_SURFACE_SEED");
    };
    std::string config_path;
    auto add_config = [&config_path](CLI::App* sub) {
        sub->add_option("--config", config_path, "flat key=value option file; flags win");
    };

    GreenOpts green;
    auto* sub_green = app.add_subcommand("green", "Dirichlet Green's function column");
    sub_green->add_option("--d", green.d)->check(CLI::Range(1, 4));
    sub_green->add_option("--L", green.L)->check(CLI::PositiveNumber);
    sub_green->add_option("--site", green.site, "site index (default: center)");
    sub_green->add_option("--tol", green.tol);
    sub_green->add_option("--out", green.out, "field CSV path");
    add_config(sub_green);

    GroundStateOpts gs;
    auto* sub_gs = app.add_subcommand("ground-state", "quenched ground state under a sampled field");
    sub_gs->add_option("--d", gs.d)->check(CLI::Range(1, 4));
    sub_gs->add_option("--L", gs.L)->check(CLI::PositiveNumber);
    sub_gs->add_option("--lambda", gs.lambda)->check(CLI::NonNegativeNumber);
    sub_gs->add_option("--potential", gs.potential);
    sub_gs->add_option("--dist", gs.dist);
    sub_gs->add_flag("--integer", gs.integer, "exact integer ground state (d=1)");
    sub_gs->add_option("--band", gs.band, "height band (0 = automatic)");
    sub_gs->add_option("--tol", gs.tol);
    sub_gs->add_option("--realization", gs.realization);
    sub_gs->add_option("--out", gs.out, "field CSV path");
    add_seed(sub_gs, gs.seed);
    add_config(sub_gs);

    LangevinOpts lv;
    auto* sub_lv = app.add_subcommand("langevin", "Euler-Maruyama Langevin sampling");
    sub_lv->add_option("--d", lv.d)->check(CLI::Range(1, 4));
    sub_lv->add_option("--L", lv.L)->check(CLI::PositiveNumber);
    sub_lv->add_option("--lambda", lv.lambda)->check(CLI::NonNegativeNumber);
    sub_lv->add_option("--potential", lv.potential);
    sub_lv->add_option("--dist", lv.dist);
    sub_lv->add_option("--dt", lv.dt, "time step (default: stability-safe)");
    sub_lv->add_option("--t-max", lv.t_max);
    sub_lv->add_option("--burn-in", lv.burn_in);
    sub_lv->add_option("--thin", lv.thin)->check(CLI::PositiveNumber);
    sub_lv->add_option("--realization", lv.realization);
    sub_lv->add_flag("--coupled", lv.coupled, "couple against a single-site resampled field");
    sub_lv->add_option("--resample-site", lv.resample_site, "site for --coupled (default: center)");
    sub_lv->add_option("--env-out", lv.env_out, "write the recorded environment (binary)");
    add_seed(sub_lv, lv.seed);
    add_config(sub_lv);

    HeatKernelOpts hk;
    auto* sub_hk = app.add_subcommand("heat-kernel", "parabolic evolution in an elliptic environment");
    sub_hk->add_option("--d", hk.d)->check(CLI::Range(1, 4));
    sub_hk->add_option("--L", hk.L)->check(CLI::PositiveNumber);
    sub_hk->add_option("--env", hk.env, "const:<a> | random | file:<path>");
    sub_hk->add_option("--c-minus", hk.c_minus);
    sub_hk->add_option("--c-plus", hk.c_plus);
    sub_hk->add_option("--s", hk.s, "initial time");
    sub_hk->add_option("--t-max", hk.t_max);
    sub_hk->add_option("--dt", hk.dt);
    sub_hk->add_option("--refresh", hk.refresh, "random-environment refresh interval");
    sub_hk->add_option("--source", hk.source, "delta source site (default: center)");
    sub_hk->add_option("--thin", hk.thin)->check(CLI::PositiveNumber);
    add_seed(sub_hk, hk.seed);
    add_config(sub_hk);

    IvgffOpts iv;
    auto* sub_iv = app.add_subcommand("ivgff", "integer-valued random-field Gaussian free field");
    sub_iv->add_option("--d", iv.d)->check(CLI::Range(1, 4));
    sub_iv->add_option("--L", iv.L)->check(CLI::PositiveNumber);
    sub_iv->add_option("--beta", iv.beta, "inverse temperature (inf allowed where supported)");
    sub_iv->add_option("--lambda", iv.lambda)->check(CLI::NonNegativeNumber);
    sub_iv->add_option("--dist", iv.dist);
    sub_iv->add_option("--band", iv.band, "height band (0 = automatic)");
    sub_iv->add_option("--sweeps", iv.sweeps)->check(CLI::PositiveNumber);
    sub_iv->add_option("--thin", iv.thin)->check(CLI::PositiveNumber);
    sub_iv->add_option("--realization", iv.realization);
    sub_iv->add_flag("--exact", iv.exact, "exact enumeration instead of Metropolis");
    add_seed(sub_iv, iv.seed);
    add_config(sub_iv);
    auto* sub_iv_peierls =
        sub_iv->add_subcommand("peierls", "zero-height probability via sign regions");
    sub_iv_peierls->fallthrough();
    auto* sub_iv_sets = sub_iv->add_subcommand("sets", "connected sets containing the center");
    sub_iv_sets->fallthrough();
    sub_iv_sets->add_option("--max-sites", iv.max_sites)->check(CLI::Range(1, 14));

    MembraneOpts mb;
    auto* sub_mb = app.add_subcommand("membrane", "bending-energy height variance, two routes");
    sub_mb->add_option("--d", mb.d)->check(CLI::Range(1, 4));
    sub_mb->add_option("--L", mb.L)->check(CLI::PositiveNumber);
    sub_mb->add_option("--lambda", mb.lambda)->check(CLI::NonNegativeNumber);
    sub_mb->add_option("--tol", mb.tol);
    add_config(sub_mb);

    ScalingOpts sc;
    auto* sub_sc = app.add_subcommand("scaling", "finite-size scaling sweep + exponent fit");
    sub_sc->add_option("--observable", sc.observable,
                       "grad_norm_real | height_var_real | grad_norm_iv | height_norm_iv | "
                       "membrane_height_var");
    sub_sc->add_option("--d", sc.d)->check(CLI::Range(1, 4));
    sub_sc->add_option("--L", sc.L_list, "comma-separated sizes")->delimiter(',')->required();
    sub_sc->add_option("--lambda", sc.lambda)->check(CLI::NonNegativeNumber);
    sub_sc->add_option("--beta", sc.beta);
    sub_sc->add_option("--dist", sc.dist);
    sub_sc->add_option("--n", sc.n, "disorder realizations per row");
    sub_sc->add_option("--sweeps", sc.sweeps)->check(CLI::PositiveNumber);
    sub_sc->add_option("--thin", sc.thin)->check(CLI::PositiveNumber);
    sub_sc->add_option("--band", sc.band);
    sub_sc->add_flag("--exact", sc.exact, "closed-form rows (real/membrane observables)");
    sub_sc->add_option("--model", sc.model, "power | log-linear | constant");
    sub_sc->add_option("--out", sc.out, "CSV output path");
    sub_sc->add_option("--fit-out", sc.fit_out, "fit JSON path (default: <out>.fit.json)");
    sub_sc->add_option("--checkpoint", sc.checkpoint, "partial-table CSV for resume");
    sub_sc->add_flag("--resume", sc.resume, "reuse rows present in --checkpoint");
    sub_sc->add_option("--jobs", sc.jobs, "parallel row workers");
    add_seed(sub_sc, sc.seed);
    add_config(sub_sc);

    EfronSteinOpts es;
    auto* sub_es = app.add_subcommand("efron-stein", "variance vs resampling bound");
    sub_es->add_option("--d", es.d)->check(CLI::Range(1, 4));
    sub_es->add_option("--L", es.L)->check(CLI::PositiveNumber);
    sub_es->add_option("--lambda", es.lambda)->check(CLI::NonNegativeNumber);
    sub_es->add_option("--potential", es.potential);
    sub_es->add_option("--dist", es.dist);
    sub_es->add_option("--n", es.n, "outer disorder realizations")->check(CLI::PositiveNumber);
    sub_es->add_flag("--linear-exact", es.linear, "closed-form linear estimator identity");
    add_seed(sub_es, es.seed);
    add_config(sub_es);

    auto* sub_st = app.add_subcommand("selftest", "fast invariant battery");

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = with_config_expanded(std::move(args));
        std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (sub_green->parsed()) return run_green(green);
        if (sub_gs->parsed()) return run_ground_state(gs);
        if (sub_lv->parsed()) return run_langevin(lv);
        if (sub_hk->parsed()) return run_heat_kernel(hk);
        if (sub_iv->parsed()) {
            if (sub_iv_peierls->parsed()) return run_ivgff_peierls(iv);
            if (sub_iv_sets->parsed()) return run_ivgff_sets(iv);
            return run_ivgff(iv);
        }
        if (sub_mb->parsed()) return run_membrane(mb);
        if (sub_sc->parsed()) return run_scaling(sc, argv_line);
        if (sub_es->parsed()) return run_efron_stein(es);
        if (sub_st->parsed()) return run_selftest();
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumerical;
    }
    return kExitConfig;
}
