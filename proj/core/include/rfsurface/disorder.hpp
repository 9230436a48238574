#pragma once

#include <string>

#include "rfsurface/field.hpp"
#include "rfsurface/lattice.hpp"
#include "rfsurface/rng.hpp"

namespace rfs {

/** zero-mean, unit-variance site laws for the quenched field */
enum class Distribution { Gaussian, Rademacher, UniformCentered };

const char* to_string(Distribution d);
Distribution distribution_from_string(const std::string& s);

/**
 * iid field on the interior, zero on the boundary. The value at a site is a
 * pure function of (base_seed, realization, purpose, site index), so fields
 * replay exactly and single sites can be resampled in place.
 */
Field sample_iid_field(const Lattice& lat, Distribution dist, const SeedSpec& seed);

/** copy of eta with an independent redraw at interior site x */
Field resample_at(const Field& eta, std::int32_t x, Distribution dist, const SeedSpec& seed);

/**
 * 1-dependent field: eta = -lap(zeta) for an exact zero-boundary free-field
 * sample zeta. Interior covariance is 2d at a site, -1 across an edge,
 * 0 at distance >= 2.
 */
Field sample_one_dependent_field(const Lattice& lat, const SeedSpec& seed);

}  // namespace rfs
