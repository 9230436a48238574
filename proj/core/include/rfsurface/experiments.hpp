#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rfsurface/disorder.hpp"
#include "rfsurface/lattice.hpp"
#include "rfsurface/potential.hpp"
#include "rfsurface/rng.hpp"

namespace rfs {

enum class Observable {
    grad_norm_real,       // E |grad phi|^2 / |Lambda^+|  (exact: lambda^2 tr G / |Lambda^+|)
    height_var_real,      // Var <phi(0)>                 (exact: lambda^2 (G^2)(0,0))
    grad_norm_iv,         // Metropolis E<|grad phi|^2> / |Lambda^+|
    height_norm_iv,       // E |phi|^2 / |Lambda^+|, integer model (DP at beta = inf)
    membrane_height_var,  // Var v(0) of the bending model (exact: lambda^2 (G^4)(0,0))
};

std::string to_string(Observable o);
Observable observable_from_string(const std::string& s);

struct ScalingRow {
    int d = 1;
    int L = 1;
    double lambda = 1.0;
    double beta = std::numeric_limits<double>::infinity();
    Observable observable = Observable::height_var_real;
    double estimate = 0.0;
    double std_error = 0.0;
    long n = 0;  // disorder realizations; 0 = closed form
    std::uint64_t seed = 0;
};

struct ScalingTable {
    std::vector<ScalingRow> rows;
    void validate() const;  // stderr >= 0, rows sorted by L
};

enum class FitModel { power, log_linear, constant };

std::string to_string(FitModel m);

struct ExponentFit {
    double exponent = 0.0;   // power: log-log slope; log-linear: coefficient of ln L
    double std_error = 0.0;
    double r_squared = 0.0;  // in the fitted (transformed) space
    double rss = 0.0;        // residual sum of squares in the original estimate space
    FitModel model = FitModel::power;
};

/** weighted least squares against L; requires >= 4 rows, positive estimates for log models */
ExponentFit fit_exponent(const ScalingTable& table, FitModel model);

struct EfronSteinReport {
    double variance = 0.0, variance_se = 0.0;  // direct Var[f(eta)]
    double bound = 0.0, bound_se = 0.0;        // (1/2) sum_x E[(f(eta) - f(eta^x))^2]
    int n_realizations = 0;                    // 0 = closed form
};

/** f = u(center) is linear in eta, so the bound is an identity: both sides sum G(0,y)^2 */
EfronSteinReport efron_stein_linear_exact(const Lattice& lat);

/** f = nonlinear ground-state height v(0); one resample per site per realization */
EfronSteinReport efron_stein_mc(const Lattice& lat, const Potential& pot, double lambda,
                                Distribution dist, int n_outer, const SeedSpec& seed);

enum class SamplerKind { exact_gaussian, langevin };

struct ThermalMeanConfig {
    int d = 1;
    int L = 1;
    double lambda = 1.0;
    Potential potential = Potential::quadratic(1.0);
    SamplerKind sampler = SamplerKind::exact_gaussian;
    Distribution dist = Distribution::Gaussian;
    double dt = -1.0;     // langevin step; -1 = default_dt
    double t_max = -1.0;  // -1 = 3x default burn-in
    int thin = 10;
};

/**
 * Var over eta of the thermal mean <phi(0)>. Exact-gaussian mode (quadratic
 * potential) is the closed form lambda^2/kappa^2 (G^2)(0,0) with no MC error;
 * langevin mode subtracts the mean squared thermal error from the plugin
 * variance and attaches a jackknife stderr.
 */
ScalingRow variance_of_thermal_mean(const ThermalMeanConfig& cfg, int n_realizations,
                                    const SeedSpec& seed);

struct VarianceDecomposition {
    double total = 0.0;    // E<phi^2> - (E<phi>)^2
    double thermal = 0.0;  // E[<phi^2> - <phi>^2]
    double disorder = 0.0; // Var_eta <phi>
    double thermal_se = 0.0, disorder_se = 0.0;
    int n_realizations = 0;
};

/** law of total variance at the center site; thermal + disorder = total algebraically */
VarianceDecomposition total_variance_decomposition(const ThermalMeanConfig& cfg,
                                                   int n_realizations, const SeedSpec& seed);

struct SweepConfig {
    int d = 1;
    Observable observable = Observable::height_var_real;
    double lambda = 1.0;
    double beta = std::numeric_limits<double>::infinity();
    Distribution dist = Distribution::Gaussian;
    long sweeps = 5000;  // Metropolis measurement sweeps (iv observables)
    int thin = 5;
    int band = 0;  // 0 = default_height_band per realization
};

/**
 * A single sweep row. realization_base offsets the per-realization seed
 * streams so distinct rows never share disorder; scaling_sweep uses
 * row_index * n_realizations, and parallel drivers must do the same to stay
 * byte-identical with the serial path.
 */
ScalingRow scaling_row(const SweepConfig& cfg, const Lattice& lat, int n_realizations,
                       const SeedSpec& seed, std::uint64_t realization_base);

/**
 * One table row per L: closed forms for the real/membrane observables,
 * disorder averages for the integer ones. A row that throws is dropped;
 * the sweep continues.
 */
ScalingTable scaling_sweep(const SweepConfig& cfg, std::span<const int> L_list,
                           int n_realizations, const SeedSpec& seed);

}  // namespace rfs
