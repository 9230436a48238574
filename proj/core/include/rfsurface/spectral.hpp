#pragma once

#include <vector>

#include "rfsurface/field.hpp"
#include "rfsurface/lattice.hpp"
#include "rfsurface/rng.hpp"

namespace rfs::spectral {

/**
 * Eigendata of the Dirichlet graph Laplacian on the box: products of sine
 * modes. Used for closed-form Gaussian statistics and exact free-field
 * sampling on separable boxes; PDE solves stay with the iterative solvers.
 */

/** eigenvalue of the n-site Dirichlet path, j in 1..n */
double path_eigenvalue(int j, int n);

/** trace of the Green function: sum over interior sites of G(y, y) */
double green_trace(int d, int L);

/** (G^p)(0,0) at the center site */
double green_power_center(int d, int L, int p);

/**
 * diagonal of G^p over the interior, in interior-rank order
 * (tensor odometer order coincides with lexicographic site order)
 */
std::vector<double> green_power_diag(int d, int L, int p);

/** exact sample of the zero-boundary Gaussian free field (covariance G) */
Field sample_gff(const Lattice& lat, const SeedSpec& seed);

}  // namespace rfs::spectral
