#include "rfsurface/elliptic.hpp"

#include <cmath>
#include <stdexcept>

#include "rfsurface/disorder.hpp"
#include "rfsurface/numerics.hpp"
#include "rfsurface/spectral.hpp"

namespace rfs {

namespace {

// interior-indexed operator v -> (-div a grad v) with zero boundary; a may be empty (all ones)
struct InteriorOperator {
    const Lattice& lat;
    std::span<const double> a;

    void apply(std::span<const double> v, std::span<double> out) const {
        const auto interior = lat.interior_sites();
        const std::int32_t n = static_cast<std::int32_t>(interior.size());
        for (std::int32_t r = 0; r < n; ++r) {
            const auto star = lat.star_of_rank(r);
            double acc = 0.0, diag = 0.0;
            for (const auto& inc : star) {
                const double w = a.empty() ? 1.0 : a[inc.edge];
                diag += w;
                const std::int32_t nr = lat.interior_rank(inc.neighbor);
                if (nr >= 0) acc += w * v[nr];
            }
            out[r] = diag * v[r] - acc;
        }
    }

    double diagonal(std::int32_t r) const {
        if (a.empty()) return 2.0 * lat.dim();
        double diag = 0.0;
        for (const auto& inc : lat.star_of_rank(r)) diag += a[inc.edge];
        return diag;
    }
};

std::pair<Field, SolveReport> pcg(const Lattice& lat, const InteriorOperator& op,
                                  const Field& rhs, CgOptions opt) {
    if (&rhs.lattice() != &lat) throw std::invalid_argument("solve: field on wrong lattice");
    const auto interior = lat.interior_sites();
    const std::int32_t n = static_cast<std::int32_t>(interior.size());
    std::vector<double> b(n), x(n, 0.0), r(n), z(n), p(n), q(n);
    for (std::int32_t i = 0; i < n; ++i) b[i] = rhs[interior[i]];
    double bnorm = 0.0;
    for (double v : b) bnorm += v * v;
    bnorm = std::sqrt(bnorm);
    SolveReport rep;
    Field out(lat);
    if (bnorm == 0.0) {
        rep.converged = true;
        return {out, rep};
    }
    int max_iter = opt.max_iter > 0 ? opt.max_iter : 40 * (lat.side() + 2) + 200;
    r = b;
    for (std::int32_t i = 0; i < n; ++i) z[i] = r[i] / op.diagonal(i);
    p = z;
    double rz = 0.0;
    for (std::int32_t i = 0; i < n; ++i) rz += r[i] * z[i];
    double rnorm = bnorm;
    for (int it = 0; it < max_iter; ++it) {
        op.apply(p, q);
        double pq = 0.0;
        for (std::int32_t i = 0; i < n; ++i) pq += p[i] * q[i];
        const double alpha = rz / pq;
        rnorm = 0.0;
        for (std::int32_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
            rnorm += r[i] * r[i];
        }
        rnorm = std::sqrt(rnorm);
        rep.iterations = it + 1;
        if (rnorm <= opt.tol * bnorm) {
            rep.converged = true;
            break;
        }
        double rz_new = 0.0;
        for (std::int32_t i = 0; i < n; ++i) {
            z[i] = r[i] / op.diagonal(i);
            rz_new += r[i] * z[i];
        }
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::int32_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    rep.residual = rnorm / bnorm;
    for (std::int32_t i = 0; i < n; ++i) out[interior[i]] = x[i];
    return {out, rep};
}

}  // namespace

Field apply_laplacian(const Lattice& lat, const Field& f) {
    return apply_div_a_grad(lat, {}, f);
}

Field apply_div_a_grad(const Lattice& lat, std::span<const double> a, const Field& f) {
    if (&f.lattice() != &lat) throw std::invalid_argument("apply: field on wrong lattice");
    if (!a.empty() && static_cast<std::int32_t>(a.size()) != lat.n_edges())
        throw std::invalid_argument("apply: conductance size mismatch");
    Field out(lat);
    for (std::int32_t x : lat.interior_sites()) {
        const auto star = lat.star_of_rank(lat.interior_rank(x));
        double s = 0.0;
        for (const auto& inc : star) {
            const double w = a.empty() ? 1.0 : a[inc.edge];
            s += w * (f[x] - f[inc.neighbor]);
        }
        out[x] = s;
    }
    return out;
}

Field apply_bilaplacian(const Lattice& lat, const Field& f) {
    if (!f.boundary_is_zero())
        throw std::invalid_argument("apply_bilaplacian: field must vanish on the boundary");
    // square of the zero-boundary Laplacian: the elastic energy only counts
    // lap(f) on the interior, so the intermediate field is restricted there
    return apply_laplacian(lat, apply_laplacian(lat, f));
}

std::pair<Field, SolveReport> solve_dirichlet(const Lattice& lat, const Field& rhs,
                                              CgOptions opt) {
    return pcg(lat, InteriorOperator{lat, {}}, rhs, opt);
}

std::pair<Field, SolveReport> solve_weighted_dirichlet(const Lattice& lat,
                                                       std::span<const double> a,
                                                       const Field& rhs, CgOptions opt) {
    if (static_cast<std::int32_t>(a.size()) != lat.n_edges())
        throw std::invalid_argument("solve_weighted_dirichlet: conductance size mismatch");
    for (double w : a)
        if (!(w > 0.0)) throw std::invalid_argument("solve_weighted_dirichlet: a > 0 required");
    return pcg(lat, InteriorOperator{lat, a}, rhs, opt);
}

Field green_column(const Lattice& lat, std::int32_t y, double tol) {
    if (!lat.is_interior(y)) throw std::invalid_argument("green_column: y must be interior");
    Field rhs(lat);
    rhs[y] = 1.0;
    auto [u, rep] = solve_dirichlet(lat, rhs, {tol, 0});
    if (!rep.converged) throw std::runtime_error("green_column: CG did not converge");
    return u;
}

std::pair<Field, SolveReport> solve_membrane(const Lattice& lat, const Field& rhs,
                                             CgOptions opt) {
    auto [w, rep1] = solve_dirichlet(lat, rhs, opt);
    auto [v, rep2] = solve_dirichlet(lat, w, opt);
    SolveReport rep;
    rep.iterations = rep1.iterations + rep2.iterations;
    rep.residual = std::max(rep1.residual, rep2.residual);
    rep.converged = rep1.converged && rep2.converged;
    return {std::move(v), rep};
}

GroundStateStats gaussian_ground_state_stats_exact(const Lattice& lat) {
    GroundStateStats st;
    st.height_var.assign(lat.n_sites(), 0.0);
    const auto diag = spectral::green_power_diag(lat.dim(), lat.side(), 2);
    const auto interior = lat.interior_sites();
    for (std::size_t r = 0; r < interior.size(); ++r) st.height_var[interior[r]] = diag[r];
    st.grad_norm_avg = spectral::green_trace(lat.dim(), lat.side()) / lat.n_sites();
    st.n_realizations = 0;
    return st;
}

GroundStateStats gaussian_ground_state_stats_mc(const Lattice& lat, int n_realizations,
                                                const SeedSpec& seed, double tol) {
    if (n_realizations < 2)
        throw std::invalid_argument("ground_state_stats_mc: need >= 2 realizations");
    GroundStateStats st;
    st.n_realizations = n_realizations;
    const std::int32_t n = lat.n_sites();
    std::vector<double> s1(n, 0.0), s2(n, 0.0);
    std::vector<double> grads;
    grads.reserve(n_realizations);
    for (int r = 0; r < n_realizations; ++r) {
        const Field eta = sample_iid_field(lat, Distribution::Gaussian,
                                           seed.with_realization(seed.realization + r));
        auto [u, rep] = solve_dirichlet(lat, eta, {tol, 0});
        if (!rep.converged)
            throw std::runtime_error("ground_state_stats_mc: CG did not converge");
        for (std::int32_t i = 0; i < n; ++i) {
            const double q = u[i] * u[i];
            s1[i] += q;
            s2[i] += q * q;
        }
        grads.push_back(grad_norm_sq(u) / static_cast<double>(n));
    }
    st.height_var.resize(n);
    st.height_var_se.resize(n);
    const double m = n_realizations;
    for (std::int32_t i = 0; i < n; ++i) {
        st.height_var[i] = s1[i] / m;
        const double var = s2[i] / m - st.height_var[i] * st.height_var[i];
        st.height_var_se[i] = std::sqrt(std::max(0.0, var) / (m - 1.0));
    }
    const auto g = sample_mean(grads);
    st.grad_norm_avg = g.mean;
    st.grad_norm_avg_se = g.se;
    return st;
}

}  // namespace rfs
