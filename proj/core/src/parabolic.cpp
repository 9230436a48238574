#include "rfsurface/parabolic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rfsurface/numerics.hpp"

namespace rfs {

EnvFn constant_env(double a) {
    if (!(a > 0.0)) throw std::invalid_argument("constant_env: a > 0 required");
    return [a](double, std::span<double> out) { std::fill(out.begin(), out.end(), a); };
}

EnvFn static_env(std::vector<double> a) {
    return [a = std::move(a)](double, std::span<double> out) {
        if (out.size() != a.size()) throw std::invalid_argument("static_env: size mismatch");
        std::copy(a.begin(), a.end(), out.begin());
    };
}

EnvFn random_env(const Lattice& lat, double c_minus, double c_plus, double refresh_dt,
                 const SeedSpec& seed) {
    if (!(c_plus >= c_minus) || !(c_minus > 0.0))
        throw std::invalid_argument("random_env: need 0 < c_minus <= c_plus");
    if (!(refresh_dt > 0.0)) throw std::invalid_argument("random_env: refresh_dt > 0");
    const SeedSpec spec = seed.with(Purpose::Environment);
    const std::int32_t n_edges = lat.n_edges();
    return [=](double t, std::span<double> out) {
        if (static_cast<std::int32_t>(out.size()) != n_edges)
            throw std::invalid_argument("random_env: size mismatch");
        const auto interval = static_cast<std::uint64_t>(std::floor(t / refresh_dt + 1e-12));
        CounterRng rng(spec, interval);
        for (double& v : out) v = c_minus + (c_plus - c_minus) * rng.next_uniform();
    };
}

EnvFn env_from_record(const TimeEnvironment& rec) {
    if (rec.times.empty()) throw std::invalid_argument("env_from_record: empty record");
    return [&rec](double t, std::span<double> out) {
        if (static_cast<std::int32_t>(out.size()) != rec.n_edges)
            throw std::invalid_argument("env_from_record: size mismatch");
        auto it = std::upper_bound(rec.times.begin(), rec.times.end(), t + 1e-12);
        std::size_t k = it == rec.times.begin() ? 0 : static_cast<std::size_t>(it - rec.times.begin() - 1);
        const double* row = rec.a.data() + k * static_cast<std::size_t>(rec.n_edges);
        std::copy(row, row + rec.n_edges, out.begin());
    };
}

namespace {

struct ParabolicStepper {
    const Lattice& lat;
    const EnvFn& env;
    double c_minus, c_plus, dt;
    std::vector<double> a, sums;
    std::vector<double> next;

    ParabolicStepper(const Lattice& l, const EnvFn& e, double cm, double cp, double step)
        : lat(l), env(e), c_minus(cm), c_plus(cp), dt(step),
          a(static_cast<std::size_t>(l.n_edges())),
          sums(static_cast<std::size_t>(l.n_interior())),
          next(static_cast<std::size_t>(l.n_sites())) {
        if (!(dt > 0.0) || dt > 0.1 / (2.0 * lat.dim() * c_plus) * (1.0 + 1e-12))
            throw std::invalid_argument("parabolic: dt must be in (0, 0.1/(2 d c_plus)]");
    }

    void fill_env(double t) {
        env(t, a);
        for (double v : a)
            if (v < c_minus - 1e-12 || v > c_plus + 1e-12)
                throw std::invalid_argument("parabolic: environment outside [c-, c+]");
    }

    // convex-combination update keeps values exactly nonnegative
    void step(std::vector<double>& p, double t) {
        fill_env(t);
        const auto interior = lat.interior_sites();
        for (std::size_t r = 0; r < interior.size(); ++r) {
            const std::int32_t x = interior[r];
            const auto star = lat.star_of_rank(static_cast<std::int32_t>(r));
            double total = 0.0, flow = 0.0;
            for (const auto& inc : star) {
                const double w = a[inc.edge];
                total += w;
                flow += w * p[inc.neighbor];
            }
            next[x] = (1.0 - dt * total) * p[x] + dt * flow;
        }
        for (std::size_t r = 0; r < interior.size(); ++r) p[interior[r]] = next[interior[r]];
    }
};

double interior_mass(const Lattice& lat, const std::vector<double>& p) {
    double m = 0.0;
    for (std::int32_t x : lat.interior_sites()) m += p[x];
    return m;
}

}  // namespace

HeatKernelRun evolve_heat_kernel(const Lattice& lat, const EnvFn& env, double c_minus,
                                 double c_plus, double s, std::int32_t y, double t_max,
                                 double dt, int thin) {
    if (!lat.is_interior(y)) throw std::invalid_argument("heat_kernel: source must be interior");
    if (!(t_max > s)) throw std::invalid_argument("heat_kernel: t_max > s required");
    if (thin < 1) throw std::invalid_argument("heat_kernel: thin >= 1 required");
    ParabolicStepper st(lat, env, c_minus, c_plus, dt);
    HeatKernelRun run;
    run.source = y;
    run.s = s;
    run.dt = dt;
    run.c_minus = c_minus;
    run.c_plus = c_plus;

    std::vector<double> p(lat.n_sites(), 0.0);
    p[y] = 1.0;
    const long steps = std::lround((t_max - s) / dt);
    run.frames.push_back({s, p});
    double mass = 1.0;
    run.min_value = 0.0;
    run.max_mass_step = -1e308;
    for (long n = 0; n < steps; ++n) {
        st.step(p, s + dt * static_cast<double>(n));
        const double m = interior_mass(lat, p);
        run.max_mass_step = std::max(run.max_mass_step, m - mass);
        mass = m;
        for (std::int32_t x : lat.interior_sites()) run.min_value = std::min(run.min_value, p[x]);
        if ((n + 1) % thin == 0)
            run.frames.push_back({s + dt * static_cast<double>(n + 1), p});
    }
    return run;
}

std::vector<std::pair<double, double>> duhamel_response(const Lattice& lat, const EnvFn& env,
                                                        double c_minus, double c_plus,
                                                        std::int32_t x, double amount,
                                                        double t_max, double dt, int thin) {
    if (!lat.is_interior(x)) throw std::invalid_argument("duhamel: source must be interior");
    ParabolicStepper st(lat, env, c_minus, c_plus, dt);
    const std::int32_t center = lat.center();
    std::vector<double> w(lat.n_sites(), 0.0);
    const long steps = std::lround(t_max / dt);
    std::vector<std::pair<double, double>> out;
    out.emplace_back(0.0, 0.0);
    for (long n = 0; n < steps; ++n) {
        st.step(w, dt * static_cast<double>(n));
        w[x] += dt * amount;
        if ((n + 1) % thin == 0)
            out.emplace_back(dt * static_cast<double>(n + 1), w[center]);
    }
    return out;
}

std::vector<std::pair<double, double>> duhamel_response_static_kernel(
    const Lattice& lat, const EnvFn& env, double c_minus, double c_plus, std::int32_t x,
    double amount, double t_max, double dt, int thin) {
    const auto run = evolve_heat_kernel(lat, env, c_minus, c_plus, 0.0, x, t_max, dt, 1);
    const std::int32_t center = lat.center();
    std::vector<std::pair<double, double>> out;
    const auto stride = static_cast<std::size_t>(thin);
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < run.frames.size(); ++k) {
        if (k % stride == 0) out.emplace_back(run.frames[k].t, acc * amount);
        acc += dt * run.frames[k].p[center];
    }
    if ((run.frames.size() - 1) % stride == 0)
        out.emplace_back(run.frames.back().t, acc * amount);
    return out;
}

NashAronsonReport check_nash_aronson(const Lattice& lat, const HeatKernelRun& run) {
    NashAronsonReport rep;
    const int d = lat.dim();
    const double L = std::max(1, lat.side());
    const double cm = run.c_minus;
    const auto src = lat.site(run.source);

    std::vector<double> zs, gs;
    for (const auto& fr : run.frames) {
        const double delta = fr.t - run.s;
        if (delta <= 0.0) continue;
        const double q = std::max(1.0, cm * delta);
        for (std::int32_t x : lat.interior_sites()) {
            if (fr.p[x] <= 1e-30) continue;
            const double dist = linf_distance(lat.site(x), src);
            zs.push_back(std::log(fr.p[x]) + 0.5 * d * std::log(q));
            gs.push_back(dist / std::sqrt(q) + cm * delta / (L * L));
        }
    }
    rep.n_points_upper = static_cast<long>(zs.size());
    if (zs.size() >= 2) {
        const auto fit = linear_fit(gs, zs);
        rep.c0 = std::max(0.0, -fit.slope);
        double worst = -1e308;
        for (std::size_t i = 0; i < zs.size(); ++i)
            worst = std::max(worst, zs[i] + rep.c0 * gs[i]);
        rep.C0 = std::exp(worst);
    }

    // lower envelope on the near-diagonal cone, largest workable aperture
    if (lat.linf_radius(run.source) <= lat.side() / 2) {
        for (double c1 : {1.0, 0.75, 0.5, 0.375, 0.25}) {
            double ratio_min = 1e308;
            long pts = 0;
            for (const auto& fr : run.frames) {
                const double delta = fr.t - run.s;
                if (delta <= 0.0) continue;
                const double reach = std::sqrt(cm * delta);
                if (reach > c1 * L) continue;
                const double q = std::max(1.0, cm * delta);
                for (std::int32_t x : lat.interior_sites()) {
                    if (linf_distance(lat.site(x), src) > reach) continue;
                    ratio_min = std::min(ratio_min, fr.p[x] * std::pow(q, 0.5 * d));
                    ++pts;
                }
            }
            if (pts > 0 && ratio_min > 0.0) {
                rep.c0_lower = ratio_min;
                rep.c1 = c1;
                rep.n_points_lower = pts;
                break;
            }
        }
    }
    return rep;
}

}  // namespace rfs
