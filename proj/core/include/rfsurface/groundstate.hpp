#pragma once

#include <limits>

#include "rfsurface/elliptic.hpp"
#include "rfsurface/field.hpp"
#include "rfsurface/lattice.hpp"
#include "rfsurface/potential.hpp"

namespace rfs {

struct EnergyBreakdown {
    double elastic = 0.0;         // sum over edges of V(grad phi)
    double field_coupling = 0.0;  // lambda * sum over sites of eta * phi
    double total = 0.0;           // elastic - field_coupling
};

EnergyBreakdown surface_energy(const Lattice& lat, const Potential& pot, const Field& phi,
                               const Field& eta, double lambda);
/** quadratic (1/2)(grad phi)^2 energy of an integer configuration */
EnergyBreakdown integer_energy(const Lattice& lat, const IntField& phi, const Field& eta,
                               double lambda);

struct GroundStateResult {
    Field v;
    EnergyBreakdown energy;
    SolveReport report;  // Newton iterations, final relative residual
};

/**
 * Minimizer of sum_e V(grad v) - lambda sum_x eta v with zero boundary:
 * damped Newton, each step an edge-weighted Dirichlet solve with
 * conductances V''(grad v) in [c_minus, c_plus]. Residual tolerance is
 * relative to ||lambda eta||_2.
 */
GroundStateResult solve_real_ground_state(const Lattice& lat, const Potential& pot,
                                          const Field& eta, double lambda,
                                          double tol = 1e-10, const Field* init = nullptr);

struct IntGroundStateResult {
    IntField phi;
    EnergyBreakdown energy;
    bool certified = false;  // true when the optimum never touches the band edge
};

/**
 * Exact integer ground state on a d=1 chain over heights in [-band, band],
 * by dynamic programming with a convex (parabola-envelope) transition, so the
 * cost is O(L * band). Ties resolve to the smallest height.
 */
IntGroundStateResult solve_integer_ground_state_chain(const Lattice& lat, const Field& eta,
                                                      double lambda, int band);

/** greedy +-1 descent from an initial configuration; returns a local minimum */
IntGroundStateResult local_search_integer(const Lattice& lat, const Field& eta, double lambda,
                                          IntField init, int band);

/** band heuristic from the real ground state: ceil(2 lambda max|u|) + slack(beta) */
int default_height_band(const Lattice& lat, const Field& eta, double lambda,
                        double beta = std::numeric_limits<double>::infinity());

}  // namespace rfs
