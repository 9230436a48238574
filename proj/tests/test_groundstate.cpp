#include "doctest.h"

#include <stdexcept>
#include <cmath>
#include <vector>

#include "rfsurface/disorder.hpp"
#include "rfsurface/elliptic.hpp"
#include "rfsurface/groundstate.hpp"
#include "rfsurface/ivgff.hpp"
#include "support/oracles.hpp"

using namespace rfs;

TEST_CASE("surface energy breakdown on an explicit configuration") {
    const Lattice lat(1, 1);  // sites -2..2, interior -1..1
    const auto pot = Potential::quadratic(2.0);
    Field phi(lat), eta(lat);
    const auto at = [&](int c) {
        const int coords[] = {c};
        return lat.index_of(coords);
    };
    phi[at(-1)] = 1.0;
    phi[at(0)] = 3.0;
    phi[at(1)] = -2.0;
    eta[at(-1)] = 0.5;
    eta[at(0)] = -1.0;
    eta[at(1)] = 2.0;
    // gradients along the 4 edges: 1, 2, -5, 2 and V(x) = x^2
    const auto e = surface_energy(lat, pot, phi, eta, 3.0);
    CHECK(e.elastic == doctest::Approx(1.0 + 4.0 + 25.0 + 4.0));
    CHECK(e.field_coupling == doctest::Approx(3.0 * (0.5 - 3.0 - 4.0)));
    CHECK(e.total == doctest::Approx(e.elastic - e.field_coupling));
}

TEST_CASE("integer energy: half squared gradients minus the coupling") {
    const Lattice lat(1, 1);
    IntField phi(lat);
    Field eta(lat);
    const auto at = [&](int c) {
        const int coords[] = {c};
        return lat.index_of(coords);
    };
    phi[at(-1)] = 5;
    phi[at(0)] = 10;
    phi[at(1)] = 5;
    eta[at(0)] = 10.0;
    const auto e = integer_energy(lat, phi, eta, 1.0);
    CHECK(e.elastic == doctest::Approx(0.5 * (25 + 25 + 25 + 25)));
    CHECK(e.field_coupling == doctest::Approx(100.0));
    CHECK(e.total == doctest::Approx(-50.0));
}

TEST_CASE("quadratic ground state is the scaled dirichlet solve") {
    const Lattice lat(2, 3);
    const double kappa = 2.0, lambda = 1.5;
    const Field eta = sample_iid_field(lat, Distribution::Gaussian, {91, 0, Purpose::Disorder});
    const auto res = solve_real_ground_state(lat, Potential::quadratic(kappa), eta, lambda);
    CHECK(res.report.converged);
    const auto [u, rep] = solve_dirichlet(lat, eta, {1e-13, 0});
    REQUIRE(rep.converged);
    for (std::int32_t x : lat.interior_sites())
        CHECK(res.v[x] == doctest::Approx(lambda / kappa * u[x]).epsilon(1e-8));
    CHECK(res.v.boundary_is_zero());
}

TEST_CASE("nonlinear ground state matches the dense newton oracle") {
    for (std::uint64_t seed : {1ull, 6ull}) {
        const Lattice lat(2, 3);
        const auto pot = Potential::quad_plus_sqrt(0.5);
        const Field eta =
            sample_iid_field(lat, Distribution::Gaussian, {seed, 0, Purpose::Disorder});
        const auto res = solve_real_ground_state(lat, pot, eta, 1.0, 1e-10);
        CHECK(res.report.converged);
        const auto expect = oracle::dense_ground_state(lat, pot, eta, 1.0);
        for (std::int32_t x : lat.interior_sites())
            CHECK(res.v[x] == doctest::Approx(expect[x]).epsilon(1e-8));
    }
}

TEST_CASE("ground state is a strict local minimum of the energy") {
    const Lattice lat(1, 4);
    const auto pot = Potential::quad_plus_sqrt(0.3);
    const Field eta =
        sample_iid_field(lat, Distribution::UniformCentered, {17, 0, Purpose::Disorder});
    const auto res = solve_real_ground_state(lat, pot, eta, 2.0);
    const double e0 = res.energy.total;
    CounterRng rng(SeedSpec{5, 0, Purpose::Generic}, 0);
    for (int trial = 0; trial < 20; ++trial) {
        Field probe = res.v;
        for (std::int32_t x : lat.interior_sites())
            probe[x] += 0.05 * rng.next_gaussian();
        CHECK(surface_energy(lat, pot, probe, eta, 2.0).total > e0);
    }
}

TEST_CASE("warm start from the solution converges immediately") {
    const Lattice lat(2, 2);
    const auto pot = Potential::quad_plus_sqrt(0.5);
    const Field eta = sample_iid_field(lat, Distribution::Gaussian, {33, 0, Purpose::Disorder});
    const auto first = solve_real_ground_state(lat, pot, eta, 1.0, 1e-10);
    const auto again = solve_real_ground_state(lat, pot, eta, 1.0, 1e-10, &first.v);
    CHECK(again.report.converged);
    CHECK(again.report.iterations <= 2);
}

TEST_CASE("solve_real_ground_state validates the lattice") {
    const Lattice lat(1, 2), other(1, 2);
    const Field eta(other);
    CHECK_THROWS_AS(solve_real_ground_state(lat, Potential::quadratic(1.0), eta, 1.0),
                    std::invalid_argument);
}

TEST_CASE("integer chain solver: hand-checkable tent instance") {
    // lambda eta = 10 at the center of a 3-site chain: minimizing
    // 1/2 sum (grad)^2 - 10 phi(0) over integers gives (5, 10, 5), energy -50
    const Lattice lat(1, 1);
    Field eta(lat);
    eta[lat.center()] = 10.0;
    const auto res = solve_integer_ground_state_chain(lat, eta, 1.0, 15);
    CHECK(res.certified);
    CHECK(res.energy.total == doctest::Approx(-50.0));
    const auto at = [&](int c) {
        const int coords[] = {c};
        return lat.index_of(coords);
    };
    CHECK(res.phi[at(-1)] == 5);
    CHECK(res.phi[at(0)] == 10);
    CHECK(res.phi[at(1)] == 5);
}

TEST_CASE("integer chain solver agrees with exhaustive search") {
    const Lattice lat(1, 2);
    const int band = 3;
    for (std::uint64_t s : {2ull, 9ull}) {
        const Field eta =
            sample_iid_field(lat, Distribution::Gaussian, {s, 0, Purpose::Disorder});
        const auto res = solve_integer_ground_state_chain(lat, eta, 1.0, band);
        double best = 1e300;
        const std::vector<int> offset(lat.n_interior(), 0);
        for_each_config(lat, band, offset, [&](std::span<const int> cfg) {
            IntField phi(lat);
            const auto interior = lat.interior_sites();
            for (std::size_t r = 0; r < interior.size(); ++r) phi[interior[r]] = cfg[r];
            best = std::min(best, integer_energy(lat, phi, eta, 1.0).total);
        });
        CHECK(res.energy.total == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("certified flag drops when the band clips the optimum") {
    const Lattice lat(1, 1);
    Field eta(lat);
    eta[lat.center()] = 10.0;  // optimum reaches height 10
    const auto clipped = solve_integer_ground_state_chain(lat, eta, 1.0, 4);
    CHECK_FALSE(clipped.certified);
    const auto roomy = solve_integer_ground_state_chain(lat, eta, 1.0, 12);
    CHECK(roomy.certified);
}

TEST_CASE("local search decreases energy and lands on a 1-site-stable point") {
    const Lattice lat(2, 3);
    const Field eta = sample_iid_field(lat, Distribution::Gaussian, {44, 0, Purpose::Disorder});
    const double lambda = 2.0;
    const int band = 12;
    IntField init(lat);
    const auto res = local_search_integer(lat, eta, lambda, init, band);
    CHECK(res.energy.total <= integer_energy(lat, init, eta, lambda).total);
    // no single-site +-1 move may lower the energy further
    for (std::int32_t x : lat.interior_sites()) {
        for (int s = -1; s <= 1; s += 2) {
            if (std::abs(res.phi[x] + s) > band) continue;
            IntField probe = res.phi;
            probe[x] += s;
            CHECK(integer_energy(lat, probe, eta, lambda).total >=
                  res.energy.total - 1e-9);
        }
    }
}

TEST_CASE("local search matches the chain dp on a line") {
    const Lattice lat(1, 3);
    const Field eta = sample_iid_field(lat, Distribution::Gaussian, {12, 0, Purpose::Disorder});
    const double lambda = 1.5;
    const int band = default_height_band(lat, eta, lambda);
    const auto dp = solve_integer_ground_state_chain(lat, eta, lambda, band);
    const auto ls = local_search_integer(lat, eta, lambda, dp.phi, band);
    CHECK(ls.energy.total == doctest::Approx(dp.energy.total));
}

TEST_CASE("default band scales with the disorder strength") {
    const Lattice lat(1, 4);
    const Field eta = sample_iid_field(lat, Distribution::Gaussian, {3, 0, Purpose::Disorder});
    const int b1 = default_height_band(lat, eta, 1.0);
    const int b4 = default_height_band(lat, eta, 4.0);
    CHECK(b1 >= 2);
    CHECK(b4 >= b1);
    // finite temperature widens the band
    CHECK(default_height_band(lat, eta, 1.0, 0.25) >= b1);
}
