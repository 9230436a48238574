#pragma once

#include <span>
#include <utility>
#include <vector>

#include "rfsurface/field.hpp"
#include "rfsurface/lattice.hpp"
#include "rfsurface/rng.hpp"

namespace rfs {

struct SolveReport {
    int iterations = 0;
    double residual = 0.0;  // relative two-norm
    bool converged = false;
};

struct CgOptions {
    double tol = 1e-10;
    int max_iter = 0;  // 0 = choose from problem size
};

/** minus the graph Laplacian with zero boundary data: out = -lap f on the interior, 0 outside */
Field apply_laplacian(const Lattice& lat, const Field& f);

/** out = -div(a grad f) with per-edge conductances a (indexed like lat.edges()) */
Field apply_div_a_grad(const Lattice& lat, std::span<const double> a, const Field& f);

/** interior-restricted squared Laplacian (the membrane operator) */
Field apply_bilaplacian(const Lattice& lat, const Field& f);

/** -lap u = rhs on the interior, u = 0 on the boundary; diagonally preconditioned CG */
std::pair<Field, SolveReport> solve_dirichlet(const Lattice& lat, const Field& rhs,
                                              CgOptions opt = {});

/** -div(a grad u) = rhs with zero boundary */
std::pair<Field, SolveReport> solve_weighted_dirichlet(const Lattice& lat,
                                                       std::span<const double> a,
                                                       const Field& rhs, CgOptions opt = {});

/** column y of the Green function: G(., y) */
Field green_column(const Lattice& lat, std::int32_t y, double tol = 1e-10);

/** lap^2 v = rhs (interior-restricted), zero outside the box: two nested solves */
std::pair<Field, SolveReport> solve_membrane(const Lattice& lat, const Field& rhs,
                                             CgOptions opt = {});

/**
 * Statistics of the Gaussian ground state -lap u = eta (unit-variance iid eta):
 * the per-site disorder variance E[u(x)^2] and the averaged squared gradient
 * E[(1/|box+boundary|) sum_e (grad u)^2].
 */
struct GroundStateStats {
    std::vector<double> height_var;     // site-indexed, zero on boundary
    std::vector<double> height_var_se;  // empty in exact mode
    double grad_norm_avg = 0.0;
    double grad_norm_avg_se = 0.0;
    int n_realizations = 0;  // 0 = exact
};

GroundStateStats gaussian_ground_state_stats_exact(const Lattice& lat);
GroundStateStats gaussian_ground_state_stats_mc(const Lattice& lat, int n_realizations,
                                                const SeedSpec& seed, double tol = 1e-10);

}  // namespace rfs
