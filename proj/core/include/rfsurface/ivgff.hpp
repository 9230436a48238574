#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rfsurface/field.hpp"
#include "rfsurface/lattice.hpp"
#include "rfsurface/rng.hpp"

namespace rfs {

/**
 * Integer-valued Gaussian free field with a random external field:
 *   H(phi) = 1/2 sum_e (grad phi(e))^2 - lambda sum_x eta(x) phi(x),
 * heights restricted to [-K, K], zero boundary, weight exp(-beta H).
 */
struct IVGibbsSpec {
    const Lattice* lattice = nullptr;
    const Field* eta = nullptr;
    double beta = 1.0;
    double lambda = 0.0;
    int band = 1;  // K

    void validate() const;  // throws std::invalid_argument
};

double iv_energy(const IVGibbsSpec& spec, const IntField& phi);

/** energy change of phi(rank-th interior site) += step; neighbors read as-is */
double iv_delta_energy(const IVGibbsSpec& spec, std::span<const int> interior,
                       std::int32_t rank, int step);

/** min(1, exp(-beta dH)), zero when the move leaves the band */
double metropolis_accept_probability(const IVGibbsSpec& spec, std::span<const int> interior,
                                     std::int32_t rank, int step);

struct McEstimate {
    double mean = 0.0, se = 0.0;
    long n = 0;
};

struct MetropolisRun {
    std::vector<IntField> samples;  // thinned, post burn-in
    McEstimate height_mean;         // <phi(v)>
    McEstimate height_sq;           // <phi(v)^2>
    McEstimate zero_prob;           // <1{phi(v)=0}>
    McEstimate grad_norm_avg;       // <|grad phi|^2> / |Lambda^+|
    double acceptance_rate = 0.0;
    double band_touch_rate = 0.0;   // fraction of measured sweeps with a site at +-K
    bool band_flagged = false;      // touch rate >= 1e-3
};

/** systematic-sweep single-site +-1 Metropolis chain started from zero */
MetropolisRun metropolis_sample(const IVGibbsSpec& spec, long sweeps, int thin,
                                const SeedSpec& seed, long burn_in = -1);

/** visits every configuration phi = psi + offset, psi in [-K,K]^interior */
void for_each_config(const Lattice& lat, int band, std::span<const int> offset,
                     const std::function<void(std::span<const int>)>& visit);

struct EnumerationResult {
    double log_partition = 0.0;
    double height_mean = 0.0;   // <phi(v)>, v = center
    double height_sq = 0.0;     // <phi(v)^2>
    double zero_prob = 0.0;     // <1{phi(v)=0}>
    double grad_norm_avg = 0.0;
    double log_exp_moment = 0.0;  // log <exp((beta/8) |grad phi - lambda grad u|^2)>
    double fitted_C = 0.0;        // log_exp_moment / ((1+beta) |Lambda^+|)
    double log_gauge_sum = 0.0;   // log sum_phi exp(-(beta/2) |grad phi - lambda grad u|^2)
    std::vector<double> edge_grad_mean;  // <grad phi(e)> per edge
    std::vector<int> mode;               // most probable configuration, interior-ranked
    long long n_configs = 0;
};

/** exhaustive sum over the banded state space; throws if (2K+1)^|interior| > 1e8 */
EnumerationResult exact_enumerate(const IVGibbsSpec& spec, bool with_edge_means = true);

/** the gauge sum above with the enumeration window recentered at `offset` */
double log_gauge_sum(const IVGibbsSpec& spec, std::span<const int> offset);

struct ConnectedSetRecord {
    std::vector<std::int32_t> sites;  // sorted site indices, contains v
    int boundary_size = 0;            // outer vertex boundary in Z^d
    double eta_sum = 0.0;
};

struct ConnectedSetFamily {
    std::vector<ConnectedSetRecord> records;
    std::vector<long> count_by_size;      // index = |set|, entry 0 unused
    std::vector<long> count_by_boundary;  // index = |boundary|
    double worst_margin = 0.0;            // min over sets of |bd| - lambda |sum eta|
    bool event_holds = false;             // worst_margin >= 0
};

/**
 * All connected subsets of the interior containing v with at most max_sites
 * sites, plus the field event "lambda |sum_Lambda eta| <= |boundary|" over
 * the family. Enumeration is exponential; max_sites is capped at 14.
 */
ConnectedSetFamily enumerate_connected_sets(const Lattice& lat, std::int32_t v, int max_sites,
                                            const Field& eta, double lambda);

struct PeierlsReport {
    McEstimate zero_prob;    // <1{phi(v)=0}>
    McEstimate d_plus_prob;  // <1{D+ nonempty}>, D+ = component of v in {phi >= 1}
    McEstimate d_minus_prob;
    bool region_logic_ok = false;  // 1 - zero <= d+ + d- (pointwise identity)
};

PeierlsReport peierls_zero_probability(const Lattice& lat, std::int32_t v,
                                       std::span<const IntField> samples);
PeierlsReport peierls_zero_probability_exact(const IVGibbsSpec& spec);

/** P(x) = floor(L^{1-d/2}) * max(0, floor(L/4) - |x - y|_inf); y within Lambda_{L/2} */
IntField pyramid_test_function(const Lattice& lat, std::int32_t y);

struct ShiftMargin {
    double margin = 0.0;  // 2 sum_e <grad phi> grad w - 2 lambda sum_x eta w + |grad w|^2
    double se = 0.0;
};

/** quenched shift inequality: margin >= 0 for every integer w vanishing on the boundary */
ShiftMargin check_shift_inequality(const IVGibbsSpec& spec, const EnumerationResult& exact,
                                   const IntField& w);
ShiftMargin check_shift_inequality(const IVGibbsSpec& spec, std::span<const IntField> samples,
                                   const IntField& w);

}  // namespace rfs
