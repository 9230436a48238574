#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "rfsurface/field.hpp"
#include "rfsurface/langevin.hpp"
#include "rfsurface/lattice.hpp"
#include "rfsurface/rng.hpp"

namespace rfs {

/**
 * Discrete heat kernel in a time-dependent uniformly elliptic edge
 * environment: d/dt P = div(a(t) grad P) with zero boundary, explicit Euler.
 */

/** fills per-edge conductances for time t */
using EnvFn = std::function<void(double t, std::span<double> a)>;

EnvFn constant_env(double a);
EnvFn static_env(std::vector<double> a);
/** iid uniform [c_minus, c_plus] per edge, redrawn every refresh_dt */
EnvFn random_env(const Lattice& lat, double c_minus, double c_plus, double refresh_dt,
                 const SeedSpec& seed);
/** piecewise-constant playback of a recorded coupled-run environment */
EnvFn env_from_record(const TimeEnvironment& rec);

struct HeatKernelFrame {
    double t;
    std::vector<double> p;  // site-indexed
};

struct HeatKernelRun {
    std::int32_t source = -1;
    double s = 0.0;  // initial time
    double dt = 0.0;
    double c_minus = 0.0, c_plus = 0.0;
    std::vector<HeatKernelFrame> frames;
    double min_value = 0.0;       // most negative entry ever seen (>= 0 required)
    double max_mass_step = 0.0;   // largest single-step mass increase (<= 0 required)
};

HeatKernelRun evolve_heat_kernel(const Lattice& lat, const EnvFn& env, double c_minus,
                                 double c_plus, double s, std::int32_t y, double t_max,
                                 double dt, int thin = 1);

/** response at the center to a persistent unit source at x, direct Euler */
std::vector<std::pair<double, double>> duhamel_response(const Lattice& lat, const EnvFn& env,
                                                        double c_minus, double c_plus,
                                                        std::int32_t x, double amount,
                                                        double t_max, double dt, int thin = 1);

/** same response assembled by quadrature over an evolved kernel; static environments only */
std::vector<std::pair<double, double>> duhamel_response_static_kernel(
    const Lattice& lat, const EnvFn& env, double c_minus, double c_plus, std::int32_t x,
    double amount, double t_max, double dt, int thin = 1);

/**
 * Fitted on/off-diagonal envelopes: an upper bound
 *   C0 (1 v c_minus (t-s))^{-d/2} exp(-c0 |x-y| / (1 v c_minus(t-s))^{1/2})
 *      exp(-c0 c_minus (t-s) / L^2)
 * holding at every recorded point, and a lower bound c0' (1 v c_minus(t-s))^{-d/2}
 * on the near-diagonal cone |x-y| <= sqrt(c_minus (t-s)) <= c1 L.
 */
struct NashAronsonReport {
    double C0 = 0.0, c0 = 0.0;  // upper envelope
    double c0_lower = 0.0;      // lower envelope constant
    double c1 = 0.0;            // fitted cone aperture
    long n_points_upper = 0, n_points_lower = 0;
};

NashAronsonReport check_nash_aronson(const Lattice& lat, const HeatKernelRun& run);

}  // namespace rfs
