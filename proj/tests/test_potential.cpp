#include "doctest.h"

#include <stdexcept>
#include <cmath>
#include <vector>

#include "rfsurface/potential.hpp"

using namespace rfs;

TEST_CASE("quadratic potential: closed forms and curvature bounds") {
    const auto pot = Potential::quadratic(2.5);
    CHECK(pot.c_minus() == doctest::Approx(2.5));
    CHECK(pot.c_plus() == doctest::Approx(2.5));
    for (double x : {-3.0, -0.5, 0.0, 1.25, 7.0}) {
        const auto e = pot.eval(x);
        CHECK(e.v == doctest::Approx(1.25 * x * x));
        CHECK(e.dv == doctest::Approx(2.5 * x));
        CHECK(e.ddv == doctest::Approx(2.5));
    }
    CHECK_THROWS_AS(Potential::quadratic(0.0), std::invalid_argument);
}

TEST_CASE("quad_plus_sqrt potential: closed forms and curvature bounds") {
    const double k = 0.5;
    const auto pot = Potential::quad_plus_sqrt(k);
    // V'' = 1 + k (1+x^2)^{-3/2}: max 1+k at 0, tends to 1
    CHECK(pot.c_minus() == doctest::Approx(1.0));
    CHECK(pot.c_plus() == doctest::Approx(1.0 + k));
    for (double x : {-2.0, -0.3, 0.0, 1.0, 4.0}) {
        const double s = std::sqrt(1.0 + x * x);
        const auto e = pot.eval(x);
        CHECK(e.v == doctest::Approx(0.5 * x * x + k * s).epsilon(1e-14));
        CHECK(e.dv == doctest::Approx(x + k * x / s).epsilon(1e-14));
        CHECK(e.ddv == doctest::Approx(1.0 + k / (s * s * s)).epsilon(1e-14));
    }
}

TEST_CASE("derivatives agree with central differences") {
    const double h = 1e-5;
    for (const auto& pot :
         {Potential::quadratic(1.3), Potential::quad_plus_sqrt(0.7)}) {
        for (double x : {-1.7, 0.2, 2.9}) {
            const double dv_fd = (pot.value(x + h) - pot.value(x - h)) / (2 * h);
            const double ddv_fd = (pot.prime(x + h) - pot.prime(x - h)) / (2 * h);
            CHECK(pot.prime(x) == doctest::Approx(dv_fd).epsilon(1e-8));
            CHECK(pot.second(x) == doctest::Approx(ddv_fd).epsilon(1e-8));
        }
    }
}

TEST_CASE("parse handles tags, defaults, and junk") {
    CHECK(Potential::parse("quadratic:2").c_plus() == doctest::Approx(2.0));
    CHECK(Potential::parse("qsqrt:0.25").c_plus() == doctest::Approx(1.25));
    CHECK(Potential::parse("quad_plus_sqrt:0.25").c_minus() == doctest::Approx(1.0));
    CHECK(Potential::parse("quadratic").c_plus() == doctest::Approx(1.0));  // default arg
    CHECK_THROWS_AS(Potential::parse("cubic:1"), std::invalid_argument);
    CHECK_THROWS_AS(Potential::parse("quadratic:abc"), std::invalid_argument);
    CHECK_THROWS_AS(Potential::parse("quadratic:1x"), std::invalid_argument);
}

TEST_CASE("scaled potential multiplies V, V', V'' and the bounds") {
    const auto base = Potential::quad_plus_sqrt(0.5);
    const auto twice = base.scaled(2.0);
    CHECK(twice.c_minus() == doctest::Approx(2.0 * base.c_minus()));
    CHECK(twice.c_plus() == doctest::Approx(2.0 * base.c_plus()));
    for (double x : {-1.0, 0.4, 3.0}) {
        CHECK(twice.value(x) == doctest::Approx(2.0 * base.value(x)));
        CHECK(twice.prime(x) == doctest::Approx(2.0 * base.prime(x)));
        CHECK(twice.second(x) == doctest::Approx(2.0 * base.second(x)));
    }
    CHECK_THROWS_AS(base.scaled(-1.0), std::invalid_argument);
}

TEST_CASE("tabulated potential: interpolation and second-difference bounds") {
    std::vector<double> xs, vs;
    for (int i = -8; i <= 8; ++i) {
        xs.push_back(0.5 * i);
        vs.push_back(0.5 * (0.5 * i) * (0.5 * i));  // exact x^2/2 samples
    }
    const auto pot = Potential::table(xs, vs);
    // second differences of a quadratic table recover the curvature exactly
    CHECK(pot.c_minus() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pot.c_plus() == doctest::Approx(1.0).epsilon(1e-12));
    // piecewise-linear value is exact at nodes, slope is a one-sided difference
    CHECK(pot.value(1.0) == doctest::Approx(0.5));
    CHECK(pot.value(1.25) == doctest::Approx(0.5 * (0.5 + 1.125)));
    CHECK(pot.prime(1.25) == doctest::Approx((1.125 - 0.5) / 0.5));

    CHECK_THROWS_AS(Potential::table({0.0, 1.0}, {0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(Potential::table({0.0, 0.0, 1.0}, {0.0, 0.0, 1.0}),
                    std::invalid_argument);
}

TEST_CASE("ellipticity report accepts the built-ins") {
    for (const auto& pot :
         {Potential::quadratic(1.0), Potential::quad_plus_sqrt(0.5),
          Potential::quad_plus_sqrt(0.0)}) {
        const auto rep = check_ellipticity(pot);
        CHECK(rep.ok());
        CHECK(rep.evenness == doctest::Approx(0.0));
        CHECK(rep.c_minus == doctest::Approx(pot.c_minus()));
        CHECK(rep.c_plus == doctest::Approx(pot.c_plus()));
    }
}

TEST_CASE("ellipticity report flags a table whose bounds fail off the nodes") {
    // the node second differences declare c_minus = 1, but the interpolant is
    // piecewise linear: inside a segment V'(x) x < c_minus x^2, and the probe
    // grid catches that through the product bound
    std::vector<double> xs{-2.0, -1.0, 0.0, 1.0, 2.0};
    std::vector<double> vs{2.0, 0.5, 0.0, 0.5, 2.0};
    const auto pot = Potential::table(xs, vs);
    CHECK(pot.c_minus() == doctest::Approx(1.0));
    const auto rep = check_ellipticity(pot, 2.0, 801);
    CHECK_FALSE(rep.ok());
    CHECK(rep.product_lower < -1e-9);
}
