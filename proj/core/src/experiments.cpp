#include "rfsurface/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "rfsurface/elliptic.hpp"
#include "rfsurface/field.hpp"
#include "rfsurface/groundstate.hpp"
#include "rfsurface/ivgff.hpp"
#include "rfsurface/langevin.hpp"
#include "rfsurface/numerics.hpp"
#include "rfsurface/spectral.hpp"

namespace rfs {

std::string to_string(Observable o) {
    switch (o) {
        case Observable::grad_norm_real: return "grad_norm_real";
        case Observable::height_var_real: return "height_var_real";
        case Observable::grad_norm_iv: return "grad_norm_iv";
        case Observable::height_norm_iv: return "height_norm_iv";
        case Observable::membrane_height_var: return "membrane_height_var";
    }
    throw std::logic_error("unknown observable");
}

Observable observable_from_string(const std::string& s) {
    if (s == "grad_norm_real") return Observable::grad_norm_real;
    if (s == "height_var_real") return Observable::height_var_real;
    if (s == "grad_norm_iv") return Observable::grad_norm_iv;
    if (s == "height_norm_iv") return Observable::height_norm_iv;
    if (s == "membrane_height_var") return Observable::membrane_height_var;
    throw std::invalid_argument("unknown observable: " + s);
}

std::string to_string(FitModel m) {
    switch (m) {
        case FitModel::power: return "power";
        case FitModel::log_linear: return "log-linear";
        case FitModel::constant: return "constant";
    }
    throw std::logic_error("unknown fit model");
}

void ScalingTable::validate() const {
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!(rows[i].std_error >= 0.0))
            throw std::invalid_argument("scaling table: negative stderr");
        if (i > 0 && rows[i].L < rows[i - 1].L)
            throw std::invalid_argument("scaling table: rows not sorted by L");
    }
}

ExponentFit fit_exponent(const ScalingTable& table, FitModel model) {
    table.validate();
    const auto& rows = table.rows;
    if (rows.size() < 4) throw std::invalid_argument("fit_exponent: need at least 4 rows");

    std::vector<double> ls, est, se;
    for (const auto& r : rows) {
        ls.push_back(static_cast<double>(r.L));
        est.push_back(r.estimate);
        se.push_back(r.std_error);
    }
    const bool weighted = std::all_of(se.begin(), se.end(), [](double s) { return s > 0.0; });

    ExponentFit out;
    out.model = model;
    if (model == FitModel::constant) {
        double wsum = 0.0, mean = 0.0;
        for (std::size_t i = 0; i < est.size(); ++i) {
            const double w = weighted ? 1.0 / (se[i] * se[i]) : 1.0;
            wsum += w;
            mean += w * est[i];
        }
        mean /= wsum;
        out.exponent = 0.0;
        out.std_error = weighted ? std::sqrt(1.0 / wsum) : 0.0;
        out.r_squared = 0.0;
        for (double e : est) out.rss += (e - mean) * (e - mean);
        return out;
    }

    std::vector<double> x, y, w;
    for (std::size_t i = 0; i < est.size(); ++i) {
        if (model == FitModel::power) {
            if (!(est[i] > 0.0))
                throw std::invalid_argument("fit_exponent: nonpositive estimate under log model");
            x.push_back(std::log(ls[i]));
            y.push_back(std::log(est[i]));
            if (weighted) w.push_back(est[i] * est[i] / (se[i] * se[i]));
        } else {
            x.push_back(std::log(ls[i]));
            y.push_back(est[i]);
            if (weighted) w.push_back(1.0 / (se[i] * se[i]));
        }
    }
    const LineFit fit = linear_fit(x, y, w);
    out.exponent = fit.slope;
    out.std_error = fit.slope_se;
    out.r_squared = std::clamp(fit.r_squared, 0.0, 1.0);
    for (std::size_t i = 0; i < est.size(); ++i) {
        const double pred = model == FitModel::power
                                ? std::exp(fit.intercept) * std::pow(ls[i], fit.slope)
                                : fit.intercept + fit.slope * x[i];
        out.rss += (est[i] - pred) * (est[i] - pred);
    }
    return out;
}

EfronSteinReport efron_stein_linear_exact(const Lattice& lat) {
    // two routes on purpose: the variance from the spectral closed form, the
    // resampling bound from a conjugate-gradient Green column
    EfronSteinReport rep;
    rep.variance = spectral::green_power_center(lat.dim(), lat.side(), 2);
    const Field g = green_column(lat, lat.center(), 1e-13);
    double s = 0.0;
    for (std::int32_t x : lat.interior_sites()) s += 0.5 * (2.0 * g[x] * g[x]);
    rep.bound = s;
    return rep;
}

EfronSteinReport efron_stein_mc(const Lattice& lat, const Potential& pot, double lambda,
                                Distribution dist, int n_outer, const SeedSpec& seed) {
    if (n_outer < 3) throw std::invalid_argument("efron_stein_mc: need at least 3 realizations");
    const std::int32_t center = lat.center();
    std::vector<double> f(n_outer), s(n_outer);
    for (int r = 0; r < n_outer; ++r) {
        const SeedSpec sr = seed.with_realization(static_cast<std::uint64_t>(r));
        const Field eta = sample_iid_field(lat, dist, sr);
        const auto base = solve_real_ground_state(lat, pot, eta, lambda);
        f[r] = base.v[center];
        double acc = 0.0;
        for (std::int32_t x : lat.interior_sites()) {
            const Field perturbed = resample_at(eta, x, dist, sr);
            const auto moved = solve_real_ground_state(lat, pot, perturbed, lambda, 1e-10, &base.v);
            const double diff = f[r] - moved.v[center];
            acc += 0.5 * diff * diff;
        }
        s[r] = acc;
    }
    EfronSteinReport rep;
    rep.variance = plugin_variance(f);
    rep.variance_se = jackknife_se_of_variance(f);
    const auto bs = sample_mean(s);
    rep.bound = bs.mean;
    rep.bound_se = bs.se;
    rep.n_realizations = n_outer;
    return rep;
}

namespace {

double quadratic_kappa(const Potential& pot) {
    if (pot.c_minus() != pot.c_plus())
        throw std::invalid_argument("exact-gaussian sampler requires a quadratic potential");
    return pot.c_plus();
}

struct ThermalSamples {
    std::vector<double> mean;        // <phi(0)> per realization
    std::vector<double> second;      // <phi(0)^2> per realization
    std::vector<double> mean_se;     // thermal error of the mean estimate
};

ThermalSamples run_thermal(const ThermalMeanConfig& cfg, int n_realizations,
                           const SeedSpec& seed) {
    if (n_realizations < 2)
        throw std::invalid_argument("thermal sampling: need at least 2 realizations");
    const Lattice lat(cfg.d, cfg.L);
    const std::int32_t center = lat.center();
    ThermalSamples out;

    if (cfg.sampler == SamplerKind::exact_gaussian) {
        const double kappa = quadratic_kappa(cfg.potential);
        const double g00 = spectral::green_power_center(cfg.d, cfg.L, 1);
        for (int r = 0; r < n_realizations; ++r) {
            const SeedSpec sr = seed.with_realization(static_cast<std::uint64_t>(r));
            const Field eta = sample_iid_field(lat, cfg.dist, sr);
            const auto [u, rep] = solve_dirichlet(lat, eta, {1e-12, 0});
            if (!rep.converged) throw std::runtime_error("thermal sampling: solve failed");
            const double m = cfg.lambda / kappa * u[center];
            out.mean.push_back(m);
            out.second.push_back(g00 / kappa + m * m);
            out.mean_se.push_back(0.0);
        }
        return out;
    }

    const double dt = cfg.dt > 0.0 ? cfg.dt : default_dt(cfg.d, cfg.potential);
    const double burn = default_burn_in(cfg.L);
    const double t_max = cfg.t_max > 0.0 ? cfg.t_max : 3.0 * burn;
    if (t_max <= burn)
        throw std::invalid_argument("thermal sampling: t_max must exceed the burn-in");
    for (int r = 0; r < n_realizations; ++r) {
        const SeedSpec sr = seed.with_realization(static_cast<std::uint64_t>(r));
        const Field eta = sample_iid_field(lat, cfg.dist, sr);
        const auto traj =
            simulate(lat, cfg.potential, eta, cfg.lambda, dt, t_max, cfg.thin, sr);
        const auto m1 = estimate_site_moment(traj, center, 1, burn);
        const auto m2 = estimate_site_moment(traj, center, 2, burn);
        out.mean.push_back(m1.mean);
        out.second.push_back(m2.mean);
        out.mean_se.push_back(m1.se);
    }
    return out;
}

}  // namespace

ScalingRow variance_of_thermal_mean(const ThermalMeanConfig& cfg, int n_realizations,
                                    const SeedSpec& seed) {
    ScalingRow row;
    row.d = cfg.d;
    row.L = cfg.L;
    row.lambda = cfg.lambda;
    row.beta = 1.0;
    row.observable = Observable::height_var_real;
    row.seed = seed.base_seed;

    if (cfg.sampler == SamplerKind::exact_gaussian) {
        const double kappa = quadratic_kappa(cfg.potential);
        const double ratio = cfg.lambda / kappa;
        row.estimate = ratio * ratio * spectral::green_power_center(cfg.d, cfg.L, 2);
        row.std_error = 0.0;
        row.n = 0;
        return row;
    }

    const ThermalSamples ts = run_thermal(cfg, n_realizations, seed);
    double noise = 0.0;
    for (double s : ts.mean_se) noise += s * s;
    noise /= static_cast<double>(ts.mean_se.size());
    row.estimate = std::max(0.0, plugin_variance(ts.mean) - noise);
    row.std_error = jackknife_se_of_variance(ts.mean);
    row.n = n_realizations;
    return row;
}

VarianceDecomposition total_variance_decomposition(const ThermalMeanConfig& cfg,
                                                   int n_realizations, const SeedSpec& seed) {
    const ThermalSamples ts = run_thermal(cfg, n_realizations, seed);
    const long n = static_cast<long>(ts.mean.size());
    std::vector<double> thermal(n);
    for (long r = 0; r < n; ++r) thermal[r] = ts.second[r] - ts.mean[r] * ts.mean[r];

    VarianceDecomposition out;
    const auto th = sample_mean(thermal);
    out.thermal = th.mean;
    out.thermal_se = th.se;
    out.disorder = plugin_variance(ts.mean);
    out.disorder_se = jackknife_se_of_variance(ts.mean);
    const auto q = sample_mean(ts.second);
    const auto m = sample_mean(ts.mean);
    out.total = q.mean - m.mean * m.mean;
    out.n_realizations = static_cast<int>(n);
    return out;
}

ScalingRow scaling_row(const SweepConfig& cfg, const Lattice& lat, int n_realizations,
                       const SeedSpec& seed, std::uint64_t realization_base) {
    ScalingRow row;
    row.d = cfg.d;
    row.L = lat.side();
    row.lambda = cfg.lambda;
    row.beta = cfg.beta;
    row.observable = cfg.observable;
    row.seed = seed.base_seed;

    const double norm = lat.n_sites();
    switch (cfg.observable) {
        case Observable::grad_norm_real:
            row.estimate = cfg.lambda * cfg.lambda * spectral::green_trace(cfg.d, lat.side()) / norm;
            row.beta = 1.0;
            return row;
        case Observable::height_var_real:
            row.estimate =
                cfg.lambda * cfg.lambda * spectral::green_power_center(cfg.d, lat.side(), 2);
            row.beta = 1.0;
            return row;
        case Observable::membrane_height_var:
            row.estimate =
                cfg.lambda * cfg.lambda * spectral::green_power_center(cfg.d, lat.side(), 4);
            row.beta = 1.0;
            return row;
        default: break;
    }

    std::vector<double> values;
    for (int r = 0; r < n_realizations; ++r) {
        const SeedSpec sr = seed.with_realization(realization_base + static_cast<std::uint64_t>(r));
        const Field eta = sample_iid_field(lat, cfg.dist, sr);

        if (cfg.observable == Observable::height_norm_iv && std::isinf(cfg.beta)) {
            if (cfg.d != 1)
                throw std::invalid_argument("height_norm_iv at beta=inf requires d=1");
            int band = cfg.band > 0 ? cfg.band : default_height_band(lat, eta, cfg.lambda);
            IntGroundStateResult gs = solve_integer_ground_state_chain(lat, eta, cfg.lambda, band);
            for (int attempt = 0; attempt < 2 && !gs.certified; ++attempt) {
                band *= 2;
                gs = solve_integer_ground_state_chain(lat, eta, cfg.lambda, band);
            }
            if (!gs.certified)
                throw std::runtime_error("integer ground state not certified within the band");
            values.push_back(norm_sq_interior(gs.phi) / norm);
            continue;
        }

        if (std::isinf(cfg.beta))
            throw std::invalid_argument("metropolis observables need a finite beta");
        const int band = cfg.band > 0 ? cfg.band
                                      : default_height_band(lat, eta, cfg.lambda, cfg.beta);
        const IVGibbsSpec spec{&lat, &eta, cfg.beta, cfg.lambda, band};
        const MetropolisRun run = metropolis_sample(spec, cfg.sweeps, cfg.thin, sr);
        if (run.band_flagged)
            throw std::runtime_error("metropolis band saturated; increase the band");
        if (cfg.observable == Observable::grad_norm_iv) {
            values.push_back(run.grad_norm_avg.mean);
        } else {  // height_norm_iv at finite beta
            std::vector<double> per_sample;
            per_sample.reserve(run.samples.size());
            for (const auto& phi : run.samples)
                per_sample.push_back(norm_sq_interior(phi) / norm);
            values.push_back(batch_means(per_sample).mean);
        }
    }
    const auto stats = sample_mean(values);
    row.estimate = stats.mean;
    row.std_error = stats.se;
    row.n = n_realizations;
    return row;
}

ScalingTable scaling_sweep(const SweepConfig& cfg, std::span<const int> L_list,
                           int n_realizations, const SeedSpec& seed) {
    if (L_list.empty()) throw std::invalid_argument("scaling_sweep: empty L list");
    for (std::size_t i = 1; i < L_list.size(); ++i)
        if (L_list[i] <= L_list[i - 1])
            throw std::invalid_argument("scaling_sweep: L list must be strictly increasing");

    ScalingTable table;
    for (std::size_t i = 0; i < L_list.size(); ++i) {
        try {
            const Lattice lat(cfg.d, L_list[i]);
            table.rows.push_back(scaling_row(cfg, lat, n_realizations, seed,
                                             static_cast<std::uint64_t>(i) * n_realizations));
        } catch (const std::exception& ex) {
            std::cerr << "scaling_sweep: dropping L=" << L_list[i] << ": " << ex.what() << "\n";
        }
    }
    table.validate();
    return table;
}

}  // namespace rfs
