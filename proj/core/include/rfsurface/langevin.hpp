#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rfsurface/field.hpp"
#include "rfsurface/lattice.hpp"
#include "rfsurface/potential.hpp"
#include "rfsurface/rng.hpp"

namespace rfs {

/**
 * Overdamped Langevin dynamics for the random-field surface measure:
 *   d phi(y) = (sum_{e at y} V'(grad phi(e)) + lambda eta(y)) dt + sqrt(2) dB(y)
 * with zero start and zero boundary, discretized by Euler-Maruyama.
 */

/** explicit-Euler stability cap 0.1 / (2 d c_plus); simulate() rejects larger dt */
double stability_dt_limit(int d, const Potential& pot);
/** conservative default 0.05 / (2 d c_plus) */
double default_dt(int d, const Potential& pot);
/** default burn-in 10 L^2 time units */
double default_burn_in(int L);

struct Trajectory {
    const Lattice* lattice = nullptr;
    double dt = 0.0;
    double lambda = 0.0;
    std::vector<double> times;                 // recorded epochs
    std::vector<std::vector<double>> states;   // site-indexed snapshots
    std::uint64_t base_seed = 0, realization = 0;
};

Trajectory simulate(const Lattice& lat, const Potential& pot, const Field& eta,
                    double lambda, double dt, double t_max, int thin, const SeedSpec& seed);

/** batch-means estimate of a scalar observable read from a trajectory */
struct GibbsEstimate {
    std::string observable;
    double mean = 0.0;
    double se = 0.0;
    long n_effective = 0;
    double burn_in = 0.0;
};

/** per-site thermal means with batch-means errors */
struct SiteMeans {
    std::vector<double> mean, se;
    long n_samples = 0;
    int n_batches = 0;
    double burn_in = 0.0;
};
SiteMeans estimate_thermal_mean(const Trajectory& traj, double burn_in);

/** time average of phi(site)^power */
GibbsEstimate estimate_site_moment(const Trajectory& traj, std::int32_t site, int power,
                                   double burn_in);
/** time average of sum_e (grad phi)^2 */
GibbsEstimate estimate_grad_norm_sq(const Trajectory& traj, double burn_in);
/** time average of sum_{e at x} V'(grad phi(e)), oriented out of x */
GibbsEstimate estimate_site_divergence(const Trajectory& traj, const Potential& pot,
                                       std::int32_t site, double burn_in,
                                       bool weight_by_phi = false);

/** per-edge conductances along a coupled pair of trajectories */
struct TimeEnvironment {
    std::vector<double> times;
    std::int32_t n_edges = 0;
    std::vector<double> a;  // times.size() x n_edges, row-major
    double c_minus = 0.0, c_plus = 0.0;
    double at(std::size_t epoch, std::int32_t edge) const {
        return a[epoch * static_cast<std::size_t>(n_edges) + edge];
    }
};

/**
 * Two copies driven by the same noise under fields eta and eta_bar. The
 * difference w solves a linear parabolic equation whose conductances (the
 * recorded environment) are the mean of V'' along the segment between the
 * coupled gradients; they always lie in [c_minus, c_plus].
 */
struct CoupledRun {
    Trajectory phi, phi_bar, diff;
    TimeEnvironment env;
};

CoupledRun simulate_coupled(const Lattice& lat, const Potential& pot, const Field& eta,
                            const Field& eta_bar, double lambda, double dt, double t_max,
                            int thin, const SeedSpec& seed);

/** mean of V'' over the segment [g2, g1]: exact difference quotient of V' when
 *  the gradients differ, Gauss-Legendre quadrature otherwise */
double environment_integral(const Potential& pot, double g1, double g2, int n_nodes = 8);

}  // namespace rfs
