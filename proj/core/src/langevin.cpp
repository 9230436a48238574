#include "rfsurface/langevin.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "rfsurface/numerics.hpp"

namespace rfs {

double stability_dt_limit(int d, const Potential& pot) {
    return 0.1 / (2.0 * d * pot.c_plus());
}

double default_dt(int d, const Potential& pot) {
    return 0.05 / (2.0 * d * pot.c_plus());
}

double default_burn_in(int L) {
    return 10.0 * static_cast<double>(L) * static_cast<double>(std::max(L, 1));
}

namespace {

void check_step_params(const Lattice& lat, const Potential& pot, double dt, double t_max,
                       int thin) {
    if (!(dt > 0.0) || dt > stability_dt_limit(lat.dim(), pot) * (1.0 + 1e-12))
        throw std::invalid_argument("langevin: dt must be in (0, 0.1/(2 d c_plus)]");
    if (!(t_max > 0.0)) throw std::invalid_argument("langevin: t_max > 0 required");
    if (thin < 1) throw std::invalid_argument("langevin: thin >= 1 required");
}

struct Stepper {
    const Lattice& lat;
    const Potential& pot;
    const Field& eta;
    double lambda, dt;
    std::vector<double> drift;  // interior-indexed
    std::vector<std::int32_t> rank_a, rank_b;

    Stepper(const Lattice& l, const Potential& p, const Field& e, double lam, double step)
        : lat(l), pot(p), eta(e), lambda(lam), dt(step),
          drift(l.n_interior(), 0.0) {
        rank_a.reserve(lat.n_edges());
        rank_b.reserve(lat.n_edges());
        for (const auto& ed : lat.edges()) {
            rank_a.push_back(lat.interior_rank(ed.a));
            rank_b.push_back(lat.interior_rank(ed.b));
        }
    }

    // phi += dt * (sum V'(grad) + lambda eta) + sqrt(2 dt) * noise
    void step(std::vector<double>& phi, std::span<const double> noise) {
        const auto edges = lat.edges();
        std::fill(drift.begin(), drift.end(), 0.0);
        for (std::int32_t e = 0; e < lat.n_edges(); ++e) {
            const double g = pot.prime(phi[edges[e].b] - phi[edges[e].a]);
            if (rank_a[e] >= 0) drift[rank_a[e]] += g;
            if (rank_b[e] >= 0) drift[rank_b[e]] -= g;
        }
        const auto interior = lat.interior_sites();
        const double root = std::sqrt(2.0 * dt);
        for (std::size_t r = 0; r < interior.size(); ++r) {
            const std::int32_t x = interior[r];
            phi[x] += dt * (drift[r] + lambda * eta[x]) + root * noise[r];
        }
    }
};

std::vector<CounterRng> make_noise_streams(const Lattice& lat, const SeedSpec& seed) {
    std::vector<CounterRng> gens;
    gens.reserve(lat.n_interior());
    const SeedSpec spec = seed.with(Purpose::LangevinNoise);
    for (std::int32_t x : lat.interior_sites())
        gens.emplace_back(spec, static_cast<std::uint64_t>(x));
    return gens;
}

}  // namespace

Trajectory simulate(const Lattice& lat, const Potential& pot, const Field& eta,
                    double lambda, double dt, double t_max, int thin, const SeedSpec& seed) {
    check_step_params(lat, pot, dt, t_max, thin);
    if (&eta.lattice() != &lat) throw std::invalid_argument("simulate: field on wrong lattice");
    const long steps = std::lround(t_max / dt);
    Trajectory traj;
    traj.lattice = &lat;
    traj.dt = dt;
    traj.lambda = lambda;
    traj.base_seed = seed.base_seed;
    traj.realization = seed.realization;

    std::vector<double> phi(lat.n_sites(), 0.0);
    auto gens = make_noise_streams(lat, seed);
    std::vector<double> noise(lat.n_interior());
    Stepper st(lat, pot, eta, lambda, dt);
    traj.times.push_back(0.0);
    traj.states.push_back(phi);
    for (long n = 0; n < steps; ++n) {
        for (std::size_t r = 0; r < noise.size(); ++r) noise[r] = gens[r].next_gaussian();
        st.step(phi, noise);
        if ((n + 1) % thin == 0) {
            traj.times.push_back(dt * static_cast<double>(n + 1));
            traj.states.push_back(phi);
        }
    }
    return traj;
}

namespace {

std::size_t first_epoch_after(const Trajectory& traj, double burn_in) {
    std::size_t k = 0;
    while (k < traj.times.size() && traj.times[k] < burn_in) ++k;
    if (k >= traj.times.size())
        throw std::invalid_argument("trajectory: burn-in swallows every sample");
    return k;
}

}  // namespace

SiteMeans estimate_thermal_mean(const Trajectory& traj, double burn_in) {
    const std::size_t k0 = first_epoch_after(traj, burn_in);
    const Lattice& lat = *traj.lattice;
    SiteMeans out;
    out.burn_in = burn_in;
    const std::size_t n = traj.states.size() - k0;
    out.mean.assign(lat.n_sites(), 0.0);
    out.se.assign(lat.n_sites(), 0.0);
    std::vector<double> samples(n);
    for (std::int32_t x = 0; x < lat.n_sites(); ++x) {
        for (std::size_t k = 0; k < n; ++k) samples[k] = traj.states[k0 + k][x];
        const auto bs = batch_means(samples);
        out.mean[x] = bs.mean;
        out.se[x] = bs.se;
        out.n_samples = bs.n_samples;
        out.n_batches = bs.n_batches;
    }
    return out;
}

namespace {

GibbsEstimate estimate_scalar(const Trajectory& traj, const std::string& tag, double burn_in,
                              const std::function<double(const std::vector<double>&)>& f) {
    const std::size_t k0 = first_epoch_after(traj, burn_in);
    std::vector<double> samples;
    samples.reserve(traj.states.size() - k0);
    for (std::size_t k = k0; k < traj.states.size(); ++k) samples.push_back(f(traj.states[k]));
    const auto bs = batch_means(samples);
    return {tag, bs.mean, bs.se, bs.n_samples, burn_in};
}

}  // namespace

GibbsEstimate estimate_site_moment(const Trajectory& traj, std::int32_t site, int power,
                                   double burn_in) {
    return estimate_scalar(traj, "phi^" + std::to_string(power), burn_in,
                           [site, power](const std::vector<double>& s) {
                               return std::pow(s[site], power);
                           });
}

GibbsEstimate estimate_grad_norm_sq(const Trajectory& traj, double burn_in) {
    const Lattice& lat = *traj.lattice;
    return estimate_scalar(traj, "grad_norm_sq", burn_in, [&lat](const std::vector<double>& s) {
        double acc = 0.0;
        for (const auto& e : lat.edges()) {
            const double g = s[e.b] - s[e.a];
            acc += g * g;
        }
        return acc;
    });
}

GibbsEstimate estimate_site_divergence(const Trajectory& traj, const Potential& pot,
                                       std::int32_t site, double burn_in, bool weight_by_phi) {
    const Lattice& lat = *traj.lattice;
    const std::int32_t rank = lat.interior_rank(site);
    if (rank < 0) throw std::invalid_argument("estimate_site_divergence: interior site required");
    const auto star = lat.star_of_rank(rank);
    const std::string tag = weight_by_phi ? "phi_div_vprime" : "div_vprime";
    return estimate_scalar(traj, tag, burn_in,
                           [&, site, weight_by_phi](const std::vector<double>& s) {
                               double acc = 0.0;
                               for (const auto& inc : star)
                                   acc += pot.prime(s[inc.neighbor] - s[site]);
                               return weight_by_phi ? s[site] * acc : acc;
                           });
}

double environment_integral(const Potential& pot, double g1, double g2, int n_nodes) {
    const double span = g1 - g2;
    const double scale = 1.0 + std::abs(g1) + std::abs(g2);
    if (std::abs(span) > 1e-9 * scale) {
        return (pot.prime(g1) - pot.prime(g2)) / span;
    }
    const auto q = gauss_legendre(n_nodes);
    double s = 0.0;
    for (int i = 0; i < n_nodes; ++i)
        s += q.weights[i] * pot.second(q.nodes[i] * g1 + (1.0 - q.nodes[i]) * g2);
    return s;
}

CoupledRun simulate_coupled(const Lattice& lat, const Potential& pot, const Field& eta,
                            const Field& eta_bar, double lambda, double dt, double t_max,
                            int thin, const SeedSpec& seed) {
    check_step_params(lat, pot, dt, t_max, thin);
    if (&eta.lattice() != &lat || &eta_bar.lattice() != &lat)
        throw std::invalid_argument("simulate_coupled: field on wrong lattice");
    const long steps = std::lround(t_max / dt);
    CoupledRun run;
    for (Trajectory* t : {&run.phi, &run.phi_bar, &run.diff}) {
        t->lattice = &lat;
        t->dt = dt;
        t->lambda = lambda;
        t->base_seed = seed.base_seed;
        t->realization = seed.realization;
    }
    run.env.n_edges = lat.n_edges();
    run.env.c_minus = pot.c_minus();
    run.env.c_plus = pot.c_plus();

    std::vector<double> phi(lat.n_sites(), 0.0), phi_bar(lat.n_sites(), 0.0);
    auto gens = make_noise_streams(lat, seed);
    std::vector<double> noise(lat.n_interior());
    Stepper st(lat, pot, eta, lambda, dt), st_bar(lat, pot, eta_bar, lambda, dt);
    const auto edges = lat.edges();

    auto record = [&](double t) {
        run.phi.times.push_back(t);
        run.phi.states.push_back(phi);
        run.phi_bar.times.push_back(t);
        run.phi_bar.states.push_back(phi_bar);
        run.diff.times.push_back(t);
        std::vector<double> w(lat.n_sites());
        for (std::int32_t i = 0; i < lat.n_sites(); ++i) w[i] = phi[i] - phi_bar[i];
        run.diff.states.push_back(std::move(w));
        run.env.times.push_back(t);
        const double slack = 1e-9 * (1.0 + pot.c_plus());
        for (std::int32_t e = 0; e < lat.n_edges(); ++e) {
            const double g1 = phi[edges[e].b] - phi[edges[e].a];
            const double g2 = phi_bar[edges[e].b] - phi_bar[edges[e].a];
            double a = environment_integral(pot, g1, g2);
            if (a < pot.c_minus() - slack || a > pot.c_plus() + slack)
                throw std::logic_error("simulate_coupled: environment left [c-, c+]");
            a = std::min(std::max(a, pot.c_minus()), pot.c_plus());
            run.env.a.push_back(a);
        }
    };

    record(0.0);
    for (long n = 0; n < steps; ++n) {
        for (std::size_t r = 0; r < noise.size(); ++r) noise[r] = gens[r].next_gaussian();
        st.step(phi, noise);
        st_bar.step(phi_bar, noise);
        if ((n + 1) % thin == 0) record(dt * static_cast<double>(n + 1));
    }
    return run;
}

}  // namespace rfs
