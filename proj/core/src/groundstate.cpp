#include "rfsurface/groundstate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rfs {

EnergyBreakdown surface_energy(const Lattice& lat, const Potential& pot, const Field& phi,
                               const Field& eta, double lambda) {
    EnergyBreakdown e;
    for (const auto& ed : lat.edges()) e.elastic += pot.value(phi[ed.b] - phi[ed.a]);
    e.field_coupling = lambda * dot_interior(eta, phi);
    e.total = e.elastic - e.field_coupling;
    return e;
}

EnergyBreakdown integer_energy(const Lattice& lat, const IntField& phi, const Field& eta,
                               double lambda) {
    EnergyBreakdown e;
    for (const auto& ed : lat.edges()) {
        const double g = static_cast<double>(phi[ed.b] - phi[ed.a]);
        e.elastic += 0.5 * g * g;
    }
    double dot = 0.0;
    for (std::int32_t i : lat.interior_sites()) dot += eta[i] * phi[i];
    e.field_coupling = lambda * dot;
    e.total = e.elastic - e.field_coupling;
    return e;
}

namespace {

// energy gradient on the interior: -sum_{e at x} V'(grad v) - lambda eta(x)
void energy_gradient(const Lattice& lat, const Potential& pot, const Field& v,
                     const Field& eta, double lambda, std::vector<double>& g) {
    const auto interior = lat.interior_sites();
    g.assign(interior.size(), 0.0);
    for (std::size_t r = 0; r < interior.size(); ++r) {
        const std::int32_t x = interior[r];
        double s = 0.0;
        for (const auto& inc : lat.star_of_rank(static_cast<std::int32_t>(r)))
            s += pot.prime(v[inc.neighbor] - v[x]);
        g[r] = -s - lambda * eta[x];
    }
}

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

GroundStateResult solve_real_ground_state(const Lattice& lat, const Potential& pot,
                                          const Field& eta, double lambda, double tol,
                                          const Field* init) {
    if (&eta.lattice() != &lat)
        throw std::invalid_argument("solve_real_ground_state: field on wrong lattice");
    Field v = init ? *init : Field(lat);
    v.zero_boundary();
    const auto interior = lat.interior_sites();
    const std::size_t n = interior.size();

    double rhs_norm = 0.0;
    for (std::int32_t x : interior) rhs_norm += lambda * eta[x] * lambda * eta[x];
    rhs_norm = std::sqrt(rhs_norm);
    const double target = tol * std::max(rhs_norm, 1e-300);

    std::vector<double> g(n);
    std::vector<double> a(lat.n_edges());
    SolveReport rep;
    double fval = surface_energy(lat, pot, v, eta, lambda).total;
    const int max_newton = 100;
    for (int it = 0; it <= max_newton; ++it) {
        energy_gradient(lat, pot, v, eta, lambda, g);
        const double gn = norm2(g);
        rep.iterations = it;
        rep.residual = rhs_norm > 0 ? gn / rhs_norm : gn;
        if (gn <= target) {
            rep.converged = true;
            break;
        }
        if (it == max_newton) break;
        const auto edges = lat.edges();
        for (std::int32_t e = 0; e < lat.n_edges(); ++e)
            a[e] = pot.second(v[edges[e].b] - v[edges[e].a]);
        Field rhs(lat);
        for (std::size_t r = 0; r < n; ++r) rhs[interior[r]] = -g[r];
        auto [delta, cg] = solve_weighted_dirichlet(lat, a, rhs, {std::min(tol, 1e-10), 0});
        if (!cg.converged)
            throw std::runtime_error("solve_real_ground_state: inner CG did not converge");
        // Armijo backtracking on the energy; full steps are the common case.
        // Once the predicted decrease drops below the energy's rounding noise
        // the test is meaningless, so take the plain Newton step: this deep in
        // the basin it contracts the gradient quadratically to machine level.
        double gtd = 0.0;
        for (std::size_t r = 0; r < n; ++r) gtd += g[r] * delta[interior[r]];
        const double energy_eps =
            8.0 * std::numeric_limits<double>::epsilon() * (std::abs(fval) + 1.0);
        if (-1e-4 * gtd <= energy_eps) {
            for (std::int32_t x : interior) v[x] += delta[x];
            fval = surface_energy(lat, pot, v, eta, lambda).total;
            continue;
        }
        double t = 1.0;
        bool accepted = false;
        for (int half = 0; half < 60; ++half) {
            Field trial = v;
            for (std::int32_t x : interior) trial[x] += t * delta[x];
            const double ftrial = surface_energy(lat, pot, trial, eta, lambda).total;
            if (ftrial <= fval + 1e-4 * t * gtd) {
                v = std::move(trial);
                fval = ftrial;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted)
            throw std::runtime_error("solve_real_ground_state: line search failed");
    }
    if (!rep.converged)
        throw std::runtime_error("solve_real_ground_state: Newton did not converge");
    EnergyBreakdown energy = surface_energy(lat, pot, v, eta, lambda);
    return {std::move(v), energy, rep};
}

namespace {

/**
 * min over h' of f(h') + (h - h')^2 / 2 on the integer grid 0..m-1, plus the
 * owning h' per cell (lower envelope of parabolas). Equal-value crossings
 * resolve to the smaller h'.
 */
void convex_transition(const std::vector<double>& f, std::vector<double>& out,
                       std::vector<std::int32_t>& arg) {
    const int m = static_cast<int>(f.size());
    std::vector<int> u(m);          // parabola sites on the hull
    std::vector<double> z(m + 1);   // interval boundaries
    int k = 0;
    u[0] = 0;
    z[0] = -1e300;
    z[1] = 1e300;
    auto intersect = [&](int q, int r) {
        // crossing of parabolas rooted at q and r (values doubled to clear the 1/2)
        return ((2.0 * f[q] + static_cast<double>(q) * q) -
                (2.0 * f[r] + static_cast<double>(r) * r)) /
               (2.0 * (q - r));
    };
    for (int q = 1; q < m; ++q) {
        double s = intersect(q, u[k]);
        while (s <= z[k]) {
            --k;
            s = intersect(q, u[k]);
        }
        ++k;
        u[k] = q;
        z[k] = s;
        z[k + 1] = 1e300;
    }
    k = 0;
    out.resize(m);
    arg.resize(m);
    for (int h = 0; h < m; ++h) {
        while (z[k + 1] < h) ++k;
        const double dh = h - u[k];
        out[h] = f[u[k]] + 0.5 * dh * dh;
        arg[h] = u[k];
    }
}

}  // namespace

IntGroundStateResult solve_integer_ground_state_chain(const Lattice& lat, const Field& eta,
                                                      double lambda, int band) {
    if (lat.dim() != 1)
        throw std::invalid_argument("integer_ground_state_chain: d = 1 only");
    if (band < 0) throw std::invalid_argument("integer_ground_state_chain: band >= 0");
    const auto interior = lat.interior_sites();
    const int n = static_cast<int>(interior.size());
    const int m = 2 * band + 1;  // heights -band..band, index h + band

    std::vector<double> dp(m), next(m);
    std::vector<std::vector<std::int32_t>> parent(n, std::vector<std::int32_t>(m, 0));
    for (int h = 0; h < m; ++h) {
        const double height = h - band;
        dp[h] = 0.5 * height * height - lambda * eta[interior[0]] * height;
    }
    std::vector<std::int32_t> arg(m);
    for (int i = 1; i < n; ++i) {
        convex_transition(dp, next, arg);
        for (int h = 0; h < m; ++h) {
            const double height = h - band;
            next[h] -= lambda * eta[interior[i]] * height;
        }
        parent[i] = arg;
        dp.swap(next);
    }
    // closing edge to the zero boundary
    int best = 0;
    double best_val = 1e308;
    for (int h = 0; h < m; ++h) {
        const double height = h - band;
        const double val = dp[h] + 0.5 * height * height;
        if (val < best_val) {
            best_val = val;
            best = h;
        }
    }
    IntGroundStateResult res{IntField(lat), {}, true};
    int h = best;
    int max_abs = 0;
    for (int i = n - 1; i >= 0; --i) {
        res.phi[interior[i]] = h - band;
        max_abs = std::max(max_abs, std::abs(h - band));
        if (i > 0) h = parent[i][h];
    }
    res.certified = max_abs < band;
    res.energy = integer_energy(lat, res.phi, eta, lambda);
    return res;
}

IntGroundStateResult local_search_integer(const Lattice& lat, const Field& eta, double lambda,
                                          IntField init, int band) {
    if (&init.lattice() != &lat)
        throw std::invalid_argument("local_search_integer: field on wrong lattice");
    IntField phi = std::move(init);
    for (std::int32_t b : lat.boundary_sites()) phi[b] = 0;
    const auto interior = lat.interior_sites();
    const int d = lat.dim();
    bool improved = true;
    long guard = 0;
    while (improved) {
        improved = false;
        for (std::size_t r = 0; r < interior.size(); ++r) {
            const std::int32_t x = interior[r];
            long nbr_sum = 0;
            for (const auto& inc : lat.star_of_rank(static_cast<std::int32_t>(r)))
                nbr_sum += phi[inc.neighbor];
            // try s = -1 and +1; accept the best strict decrease
            double best_delta = -1e-12;
            int best_s = 0;
            for (int s = -1; s <= 1; s += 2) {
                if (std::abs(phi[x] + s) > band) continue;
                const double delta = s * (2.0 * d * phi[x] - nbr_sum) + d -
                                     s * lambda * eta[x];
                if (delta < best_delta) {
                    best_delta = delta;
                    best_s = s;
                }
            }
            if (best_s != 0) {
                phi[x] += best_s;
                improved = true;
            }
        }
        if (++guard > 1000000)
            throw std::runtime_error("local_search_integer: did not terminate");
    }
    int max_abs = 0;
    for (std::int32_t x : interior) max_abs = std::max(max_abs, std::abs(phi[x]));
    IntGroundStateResult res{phi, integer_energy(lat, phi, eta, lambda), max_abs < band};
    return res;
}

int default_height_band(const Lattice& lat, const Field& eta, double lambda, double beta) {
    auto [u, rep] = solve_dirichlet(lat, eta);
    if (!rep.converged) throw std::runtime_error("default_height_band: CG did not converge");
    double umax = 0.0;
    for (std::int32_t x : lat.interior_sites()) umax = std::max(umax, std::abs(u[x]));
    const double slack = std::isinf(beta) ? 2.0 : std::max(2.0, std::ceil(6.0 / std::sqrt(beta)));
    return static_cast<int>(std::ceil(2.0 * lambda * umax) + slack);
}

}  // namespace rfs
