#include "rfsurface/disorder.hpp"

#include <cmath>
#include <stdexcept>

#include "rfsurface/spectral.hpp"

namespace rfs {

const char* to_string(Distribution d) {
    switch (d) {
        case Distribution::Gaussian: return "gaussian";
        case Distribution::Rademacher: return "rademacher";
        case Distribution::UniformCentered: return "uniform";
    }
    return "?";
}

Distribution distribution_from_string(const std::string& s) {
    if (s == "gaussian" || s == "standard_gaussian") return Distribution::Gaussian;
    if (s == "rademacher") return Distribution::Rademacher;
    if (s == "uniform" || s == "uniform_centered") return Distribution::UniformCentered;
    throw std::invalid_argument("distribution: unknown tag '" + s + "'");
}

namespace {

double draw(Distribution dist, CounterRng& rng) {
    switch (dist) {
        case Distribution::Gaussian:
            return rng.next_gaussian();
        case Distribution::Rademacher:
            return static_cast<double>(rng.next_sign());
        case Distribution::UniformCentered:
            // width 2*sqrt(3) for unit variance
            return std::sqrt(3.0) * (2.0 * rng.next_uniform() - 1.0);
    }
    return 0.0;
}

}  // namespace

Field sample_iid_field(const Lattice& lat, Distribution dist, const SeedSpec& seed) {
    Field eta(lat);
    const SeedSpec spec = seed.with(Purpose::Disorder);
    for (std::int32_t x : lat.interior_sites()) {
        CounterRng rng(spec, static_cast<std::uint64_t>(x));
        eta[x] = draw(dist, rng);
    }
    return eta;
}

Field resample_at(const Field& eta, std::int32_t x, Distribution dist, const SeedSpec& seed) {
    if (!eta.lattice().is_interior(x))
        throw std::invalid_argument("resample_at: site must be interior");
    Field out = eta;
    CounterRng rng(seed.with(Purpose::Resample), static_cast<std::uint64_t>(x));
    out[x] = draw(dist, rng);
    return out;
}

Field sample_one_dependent_field(const Lattice& lat, const SeedSpec& seed) {
    const Field zeta = spectral::sample_gff(lat, seed);
    Field eta(lat);
    const int twod = 2 * lat.dim();
    for (std::int32_t x : lat.interior_sites()) {
        const auto star = lat.star_of_rank(lat.interior_rank(x));
        double s = twod * zeta[x];
        for (const auto& inc : star) s -= zeta[inc.neighbor];
        eta[x] = s;
    }
    return eta;
}

}  // namespace rfs
