#include "doctest.h"

#include <stdexcept>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <vector>

#include "rfsurface/disorder.hpp"
#include "rfsurface/elliptic.hpp"
#include "rfsurface/groundstate.hpp"
#include "rfsurface/ivgff.hpp"
#include "support/oracles.hpp"

using namespace rfs;

namespace {

IntField field_from_ranks(const Lattice& lat, std::span<const int> cfg) {
    IntField phi(lat);
    const auto interior = lat.interior_sites();
    for (std::size_t r = 0; r < interior.size(); ++r) phi[interior[r]] = cfg[r];
    return phi;
}

std::vector<int> random_config(const Lattice& lat, int band, std::uint64_t seed) {
    CounterRng rng(SeedSpec{seed, 0, Purpose::Generic}, 0);
    std::vector<int> cfg(lat.n_interior());
    for (auto& h : cfg)
        h = static_cast<int>(rng.next_below(2 * band + 1)) - band;
    return cfg;
}

}  // namespace

TEST_CASE("spec validation") {
    const Lattice lat(1, 1);
    const Field eta(lat);
    IVGibbsSpec spec{&lat, &eta, 1.0, 0.5, 3};
    spec.validate();  // fine
    IVGibbsSpec no_lat = spec;
    no_lat.lattice = nullptr;
    CHECK_THROWS_AS(no_lat.validate(), std::invalid_argument);
    IVGibbsSpec bad_beta = spec;
    bad_beta.beta = 0.0;
    CHECK_THROWS_AS(bad_beta.validate(), std::invalid_argument);
    IVGibbsSpec bad_band = spec;
    bad_band.band = -1;
    CHECK_THROWS_AS(bad_band.validate(), std::invalid_argument);
    const Lattice other(1, 1);
    const Field foreign(other);
    IVGibbsSpec wrong = spec;
    wrong.eta = &foreign;
    CHECK_THROWS_AS(wrong.validate(), std::invalid_argument);
}

TEST_CASE("iv_energy agrees with the ground-state module's integer energy") {
    const Lattice lat(2, 2);
    const Field eta = sample_iid_field(lat, Distribution::Gaussian, {80, 0, Purpose::Disorder});
    const IVGibbsSpec spec{&lat, &eta, 1.0, 0.7, 4};
    for (std::uint64_t s = 0; s < 4; ++s) {
        const IntField phi = field_from_ranks(lat, random_config(lat, 4, 90 + s));
        CHECK(iv_energy(spec, phi) ==
              doctest::Approx(integer_energy(lat, phi, eta, 0.7).total).epsilon(1e-13));
    }
}

TEST_CASE("iv_delta_energy equals the recomputed energy difference") {
    const Lattice lat(2, 2);
    const Field eta = sample_iid_field(lat, Distribution::Gaussian, {81, 0, Purpose::Disorder});
    const IVGibbsSpec spec{&lat, &eta, 1.0, 1.3, 5};
    CounterRng rng(SeedSpec{82, 0, Purpose::Generic}, 0);
    auto cfg = random_config(lat, 4, 83);
    for (int trial = 0; trial < 60; ++trial) {
        const auto rank = static_cast<std::int32_t>(rng.next_below(lat.n_interior()));
        const int step = rng.next_sign();
        const double before = iv_energy(spec, field_from_ranks(lat, cfg));
        auto moved = cfg;
        moved[rank] += step;
        const double after = iv_energy(spec, field_from_ranks(lat, moved));
        CHECK(iv_delta_energy(spec, cfg, rank, step) ==
              doctest::Approx(after - before).epsilon(1e-12));
        if (std::abs(moved[rank]) <= spec.band) cfg = moved;  // random walk the base point
    }
}

TEST_CASE("acceptance probability is the metropolis rule with band clipping") {
    const Lattice lat(1, 1);
    Field eta(lat);
    eta[lat.center()] = 1.0;
    const IVGibbsSpec spec{&lat, &eta, 2.0, 1.0, 2};
    std::vector<int> cfg{0, 2, -1};
    // leaving the band is forbidden outright
    CHECK(metropolis_accept_probability(spec, cfg, 1, 1) == 0.0);
    CHECK(metropolis_accept_probability(spec, cfg, 2, -1) ==
          doctest::Approx(std::min(1.0, std::exp(-spec.beta *
                                                 iv_delta_energy(spec, cfg, 2, -1)))));
    // a strictly downhill move is always taken
    const double dh = iv_delta_energy(spec, cfg, 1, -1);
    if (dh < 0.0) CHECK(metropolis_accept_probability(spec, cfg, 1, -1) == 1.0);
}

TEST_CASE("metropolis acceptance satisfies detailed balance state by state") {
    const Lattice lat(1, 1);
    const Field eta = sample_iid_field(lat, Distribution::Gaussian, {84, 0, Purpose::Disorder});
    const IVGibbsSpec spec{&lat, &eta, 1.5, 0.8, 2};
    const std::vector<int> offset(lat.n_interior(), 0);
    double worst = 0.0;
    for_each_config(lat, spec.band, offset, [&](std::span<const int> cfg) {
        const std::vector<int> s(cfg.begin(), cfg.end());
        const double hs = iv_energy(spec, field_from_ranks(lat, s));
        for (std::int32_t rank = 0; rank < lat.n_interior(); ++rank) {
            for (int step = -1; step <= 1; step += 2) {
                if (std::abs(s[rank] + step) > spec.band) continue;
                auto t = s;
                t[rank] += step;
                const double ht = iv_energy(spec, field_from_ranks(lat, t));
                const double fwd =
                    std::exp(-spec.beta * hs) *
                    metropolis_accept_probability(spec, s, rank, step);
                const double bwd =
                    std::exp(-spec.beta * ht) *
                    metropolis_accept_probability(spec, t, rank, -step);
                worst = std::max(worst, std::abs(fwd - bwd));
            }
        }
    });
    CHECK(worst < 1e-12);
}

TEST_CASE("for_each_config sweeps the whole banded window around the offset") {
    const Lattice lat(1, 1);
    std::vector<int> offset{1, -1, 0};
    long count = 0;
    std::vector<int> first, last;
    for_each_config(lat, 1, offset, [&](std::span<const int> cfg) {
        if (count == 0) first.assign(cfg.begin(), cfg.end());
        last.assign(cfg.begin(), cfg.end());
        ++count;
        for (int r = 0; r < 3; ++r) CHECK(std::abs(cfg[r] - offset[r]) <= 1);
    });
    CHECK(count == 27);
    CHECK(first == std::vector<int>{0, -2, -1});
    CHECK(last == std::vector<int>{2, 0, 1});
}

TEST_CASE("enumeration at lambda = 0 is symmetric") {
    const Lattice lat(1, 2);
    const Field eta(lat);
    const IVGibbsSpec spec{&lat, &eta, 1.0, 0.0, 2};
    const auto res = exact_enumerate(spec);
    CHECK(res.n_configs == 3125);  // 5^5
    CHECK(res.height_mean == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(res.zero_prob > 0.0);
    CHECK(res.zero_prob < 1.0);
    CHECK(res.height_sq > 0.0);
    for (double g : res.edge_grad_mean) CHECK(g == doctest::Approx(0.0).epsilon(1e-13));
    for (int m : res.mode) CHECK(m == 0);
}

TEST_CASE("band saturation: widening the window stops moving the answer") {
    const Lattice lat(1, 1);
    const Field eta =
        sample_iid_field(lat, Distribution::Rademacher, {85, 0, Purpose::Disorder});
    IVGibbsSpec narrow{&lat, &eta, 2.0, 0.5, 6};
    IVGibbsSpec wide = narrow;
    wide.band = 8;
    const auto a = exact_enumerate(narrow, false);
    const auto b = exact_enumerate(wide, false);
    CHECK(a.log_partition == doctest::Approx(b.log_partition).epsilon(1e-9));
    CHECK(a.height_sq == doctest::Approx(b.height_sq).epsilon(1e-9));
    CHECK(a.zero_prob == doctest::Approx(b.zero_prob).epsilon(1e-9));
}

TEST_CASE("gauge identity ties the partition function to the shifted sum") {
    // completing the square: log Z = log sum exp(-(beta/2)|grad phi - lambda grad u|^2)
    //                                + (beta/2) lambda^2 |grad u|^2 with -lap u = eta
    const Lattice lat(1, 2);
    const Field eta = sample_iid_field(lat, Distribution::Gaussian, {86, 0, Purpose::Disorder});
    const IVGibbsSpec spec{&lat, &eta, 1.5, 0.8, 5};
    const auto res = exact_enumerate(spec, false);
    const auto [u, rep] = solve_dirichlet(lat, eta, {1e-13, 0});
    REQUIRE(rep.converged);
    double grad_u_sq = 0.0;
    for (const auto& e : lat.edges()) grad_u_sq += grad(u, e) * grad(u, e);
    const double residual =
        res.log_partition - 0.5 * spec.beta * spec.lambda * spec.lambda * grad_u_sq -
        res.log_gauge_sum;
    CHECK(std::abs(residual) < 1e-8);
}

TEST_CASE("gauge sum is stable under recentering the window") {
    const Lattice lat(1, 1);
    Field eta(lat);
    eta[lat.center()] = 2.0;
    // beta 2 and band 9 keep the window-truncation error of the uncentered
    // sum far below the comparison tolerance (the shift here is (2,4,2))
    const IVGibbsSpec spec{&lat, &eta, 2.0, 2.0, 9};
    const std::vector<int> zero_off(lat.n_interior(), 0);
    // recenter near the real ground state lambda u
    const auto [u, rep] = solve_dirichlet(lat, eta, {1e-13, 0});
    REQUIRE(rep.converged);
    std::vector<int> off(lat.n_interior());
    const auto interior = lat.interior_sites();
    for (std::size_t r = 0; r < interior.size(); ++r)
        off[r] = static_cast<int>(std::lround(spec.lambda * u[interior[r]]));
    const double a = log_gauge_sum(spec, zero_off);
    const double b = log_gauge_sum(spec, off);
    CHECK(a == doctest::Approx(b).epsilon(1e-8));
}

TEST_CASE("enumeration mode is the integer ground state") {
    const Lattice lat(1, 1);
    Field eta(lat);
    eta[lat.center()] = 3.0;
    const IVGibbsSpec spec{&lat, &eta, 1.0, 2.0, 8};
    const auto res = exact_enumerate(spec, false);
    const auto gs = solve_integer_ground_state_chain(lat, eta, spec.lambda, spec.band);
    REQUIRE(gs.certified);
    const auto interior = lat.interior_sites();
    for (std::size_t r = 0; r < interior.size(); ++r)
        CHECK(res.mode[r] == gs.phi[interior[r]]);
}

TEST_CASE("enumeration refuses state spaces past the guard") {
    const Lattice lat(1, 3);
    const Field eta(lat);
    const IVGibbsSpec spec{&lat, &eta, 1.0, 0.0, 8};  // 17^7 > 1e8
    CHECK_THROWS_AS(exact_enumerate(spec), std::invalid_argument);
}

TEST_CASE("metropolis chain reproduces the enumerated law") {
    const Lattice lat(1, 1);
    const Field eta = sample_iid_field(lat, Distribution::Gaussian, {87, 0, Purpose::Disorder});
    // this disorder draw pulls the surface toward -3.4, so the window needs
    // real headroom before the touch monitor stays quiet
    const IVGibbsSpec spec{&lat, &eta, 1.0, 1.0, 8};
    const auto exact = exact_enumerate(spec, false);
    const auto run = metropolis_sample(spec, 60000, 2, {87, 0, Purpose::Metropolis});
    CHECK(run.acceptance_rate > 0.05);
    CHECK(run.acceptance_rate < 0.95);
    CHECK_FALSE(run.band_flagged);
    CHECK(std::abs(run.height_mean.mean - exact.height_mean) < 4.0 * run.height_mean.se);
    CHECK(std::abs(run.height_sq.mean - exact.height_sq) < 4.0 * run.height_sq.se);
    CHECK(std::abs(run.zero_prob.mean - exact.zero_prob) < 4.0 * run.zero_prob.se);
    CHECK(std::abs(run.grad_norm_avg.mean - exact.grad_norm_avg) <
          4.0 * run.grad_norm_avg.se);
    // identical seeds replay the chain
    const auto again = metropolis_sample(spec, 2000, 2, {87, 0, Purpose::Metropolis});
    const auto third = metropolis_sample(spec, 2000, 2, {87, 0, Purpose::Metropolis});
    REQUIRE(again.samples.size() == third.samples.size());
    for (std::size_t k = 0; k < again.samples.size(); ++k)
        for (std::int32_t x : lat.interior_sites())
            CHECK(again.samples[k][x] == third.samples[k][x]);
}

TEST_CASE("a cramped band gets flagged") {
    const Lattice lat(1, 1);
    Field eta(lat);
    for (std::int32_t x : lat.interior_sites()) eta[x] = 2.0;
    const IVGibbsSpec spec{&lat, &eta, 2.0, 3.0, 1};
    const auto run = metropolis_sample(spec, 4000, 2, {88, 0, Purpose::Metropolis});
    CHECK(run.band_touch_rate > 0.5);
    CHECK(run.band_flagged);
}

TEST_CASE("peierls probabilities: exact route and sampled route concur") {
    const Lattice lat(1, 2);
    const Field eta = sample_iid_field(lat, Distribution::Gaussian, {89, 0, Purpose::Disorder});
    const IVGibbsSpec spec{&lat, &eta, 1.5, 0.6, 3};
    const auto exact = peierls_zero_probability_exact(spec);
    CHECK(exact.region_logic_ok);
    CHECK(exact.zero_prob.mean ==
          doctest::Approx(exact_enumerate(spec, false).zero_prob).epsilon(1e-12));
    // the three exact probabilities saturate the region bound:
    // 1 - P(phi(v)=0) <= P(D+ nonempty) + P(D- nonempty)
    CHECK(1.0 - exact.zero_prob.mean <=
          exact.d_plus_prob.mean + exact.d_minus_prob.mean + 1e-12);

    const auto run = metropolis_sample(spec, 40000, 2, {89, 0, Purpose::Metropolis});
    const auto mc = peierls_zero_probability(lat, lat.center(), run.samples);
    CHECK(mc.region_logic_ok);
    CHECK(std::abs(mc.zero_prob.mean - exact.zero_prob.mean) < 4.0 * mc.zero_prob.se);
    CHECK(std::abs(mc.d_plus_prob.mean - exact.d_plus_prob.mean) <
          4.0 * mc.d_plus_prob.se + 1e-12);
}

TEST_CASE("connected set family matches brute force and its own tallies") {
    // L = 3 so distance-3 animals through the center still fit in the box
    const Lattice lat(2, 3);
    const Field eta = sample_iid_field(lat, Distribution::Gaussian, {90, 0, Purpose::Disorder});
    const int max_sites = 4;
    const auto fam = enumerate_connected_sets(lat, lat.center(), max_sites, eta, 1.0);
    const auto brute = oracle::brute_force_connected_counts(lat, lat.center(), max_sites);
    REQUIRE(fam.count_by_size.size() >= brute.size());
    for (std::size_t k = 1; k < brute.size(); ++k)
        CHECK(fam.count_by_size[k] == brute[k]);
    // lattice animals through a fixed site of Z^2, away from the walls
    CHECK(fam.count_by_size[1] == 1);
    CHECK(fam.count_by_size[2] == 4);
    CHECK(fam.count_by_size[3] == 18);
    CHECK(fam.count_by_size[4] == 76);

    long total = 0;
    for (std::size_t k = 1; k < fam.count_by_size.size(); ++k)
        total += fam.count_by_size[k];
    CHECK(total == static_cast<long>(fam.records.size()));
    long by_boundary = 0;
    for (long c : fam.count_by_boundary) by_boundary += c;
    CHECK(by_boundary == total);

    double worst = 1e300;
    for (const auto& rec : fam.records) {
        double sum = 0.0;
        for (std::int32_t x : rec.sites) sum += eta[x];
        CHECK(rec.eta_sum == doctest::Approx(sum).epsilon(1e-13));
        worst = std::min(worst, rec.boundary_size - 1.0 * std::abs(rec.eta_sum));
        bool has_v = false;
        for (std::int32_t x : rec.sites) has_v |= x == lat.center();
        CHECK(has_v);
    }
    CHECK(fam.worst_margin == doctest::Approx(worst).epsilon(1e-12));
    CHECK(fam.event_holds == (worst >= 0.0));
    // a singleton's outer boundary in Z^2 has 4 sites
    CHECK(fam.records.front().sites.size() == 1);
    CHECK(fam.records.front().boundary_size == 4);
}

TEST_CASE("pyramid test function: formula, support, and gradient cap") {
    const Lattice lat(1, 8);
    const IntField p = pyramid_test_function(lat, lat.center());
    const int prefactor = 2;  // floor(8^{1/2})
    const int radius = 2;     // floor(8/4)
    for (std::int32_t i = 0; i < lat.n_sites(); ++i) {
        const int dist = lat.linf_radius(i);
        const int expect = prefactor * std::max(0, radius - dist);
        CHECK(p[i] == expect);
    }
    CHECK(p[lat.center()] == 4);
    int max_grad = 0;
    for (const auto& e : lat.edges()) max_grad = std::max(max_grad, std::abs(grad(p, e)));
    CHECK(max_grad == prefactor);

    // off-center apex shifts the support
    const int coords[] = {3};
    const IntField q = pyramid_test_function(lat, lat.index_of(coords));
    CHECK(q[lat.index_of(coords)] == 4);
    CHECK(q[lat.center()] == 0);

    // apex must sit inside Lambda_{L/2}
    const int far[] = {5};
    CHECK_THROWS_AS(pyramid_test_function(lat, lat.index_of(far)), std::invalid_argument);

    // in d >= 3 the prefactor floor(L^{1-d/2}) collapses to zero
    const Lattice cube(3, 6);
    const IntField z = pyramid_test_function(cube, cube.center());
    for (std::int32_t i = 0; i < cube.n_sites(); ++i) CHECK(z[i] == 0);
}

TEST_CASE("shift inequality margins: exact route, sampled route, random shifts") {
    const Lattice lat(1, 2);
    const Field eta = sample_iid_field(lat, Distribution::Gaussian, {92, 0, Purpose::Disorder});
    const IVGibbsSpec spec{&lat, &eta, 1.5, 0.8, 4};
    const auto exact = exact_enumerate(spec);
    const auto run = metropolis_sample(spec, 40000, 2, {92, 0, Purpose::Metropolis});

    CounterRng rng(SeedSpec{93, 0, Purpose::Generic}, 0);
    for (int trial = 0; trial < 12; ++trial) {
        IntField w(lat);
        for (std::int32_t x : lat.interior_sites())
            w[x] = static_cast<int>(rng.next_below(3)) - 1;
        const auto em = check_shift_inequality(spec, exact, w);
        CHECK(em.se == 0.0);
        CHECK(em.margin >= -1e-12);
        const auto sm = check_shift_inequality(spec, run.samples, w);
        CHECK(sm.margin >= -4.0 * sm.se - 1e-12);
        if (sm.se > 0.0) CHECK(std::abs(sm.margin - em.margin) < 5.0 * sm.se);
    }
    // the zero shift is the degenerate equality case
    IntField zero(lat);
    CHECK(check_shift_inequality(spec, exact, zero).margin ==
          doctest::Approx(0.0).epsilon(1e-14));
}
