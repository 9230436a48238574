#include "doctest.h"

#include <set>

#include "rfsurface/lattice.hpp"

using namespace rfs;

TEST_CASE("box sizes and interior/boundary partition") {
    for (int d = 1; d <= 3; ++d) {
        for (int L = 1; L <= 3; ++L) {
            const Lattice lat(d, L);
            long interior = 1;
            for (int k = 0; k < d; ++k) interior *= 2 * L + 1;
            CHECK(lat.n_interior() == interior);
            CHECK(lat.n_sites() > lat.n_interior());
            CHECK(static_cast<long>(lat.interior_sites().size()) == interior);
            CHECK(lat.interior_sites().size() + lat.boundary_sites().size() ==
                  static_cast<std::size_t>(lat.n_sites()));
            // boundary = sites at linf distance exactly L+1 with a neighbor inside
            for (std::int32_t b : lat.boundary_sites()) {
                CHECK(!lat.is_interior(b));
                CHECK(lat.linf_radius(b) == L + 1);
            }
        }
    }
}

TEST_CASE("d=2 boundary is the outer vertex boundary, not the full shell") {
    // sites of the enclosing (2L+3)^2 box that touch the interior; the four
    // shell corners touch nothing and must be absent
    const Lattice lat(2, 1);
    CHECK(lat.n_interior() == 9);
    CHECK(lat.n_sites() == 9 + 12);
}

TEST_CASE("every edge has an interior endpoint and edges are unique") {
    const Lattice lat(2, 2);
    std::set<std::pair<std::int32_t, std::int32_t>> seen;
    for (const auto& e : lat.edges()) {
        CHECK(e.a < e.b);
        CHECK((lat.is_interior(e.a) || lat.is_interior(e.b)));
        CHECK(linf_distance(lat.site(e.a), lat.site(e.b)) == 1);
        int manhattan = 0;
        for (int k = 0; k < lat.dim(); ++k)
            manhattan += std::abs(lat.site(e.a)[k] - lat.site(e.b)[k]);
        CHECK(manhattan == 1);
        CHECK(seen.insert({e.a, e.b}).second);
    }
    // d=2: 2 * (2L+1) * (2L+2) edges touching the interior
    CHECK(lat.n_edges() == 2 * 5 * 6);
}

TEST_CASE("star of every interior site has 2d incidences consistent with edges") {
    const Lattice lat(3, 1);
    const auto interior = lat.interior_sites();
    for (std::size_t r = 0; r < interior.size(); ++r) {
        const auto star = lat.star_of_rank(static_cast<std::int32_t>(r));
        CHECK(star.size() == 6);
        for (const auto& inc : star) {
            const auto& e = lat.edges()[inc.edge];
            const bool matches = (e.a == interior[r] && e.b == inc.neighbor) ||
                                 (e.b == interior[r] && e.a == inc.neighbor);
            CHECK(matches);
        }
    }
}

TEST_CASE("directed star leaves from x") {
    const Lattice lat(2, 1);
    const auto star = lat.directed_star(lat.center());
    CHECK(star.size() == 4);
    for (const auto& de : star) CHECK(de.from == lat.center());
    CHECK_THROWS(lat.directed_star(lat.boundary_sites()[0]));
}

TEST_CASE("index_of round-trips and center is the origin") {
    const Lattice lat(2, 2);
    for (std::int32_t i = 0; i < lat.n_sites(); ++i) CHECK(lat.index_of(lat.site(i)) == i);
    const auto c = lat.site(lat.center());
    CHECK(c[0] == 0);
    CHECK(c[1] == 0);
    const int outside[2] = {2 * 5, 0};
    CHECK(lat.index_of(outside) == -1);
}

TEST_CASE("site enumeration is lexicographic hence reproducible") {
    const Lattice a(2, 2), b(2, 2);
    for (std::int32_t i = 0; i < a.n_sites(); ++i) {
        CHECK(a.site(i)[0] == b.site(i)[0]);
        CHECK(a.site(i)[1] == b.site(i)[1]);
        if (i > 0) {
            const auto prev = a.site(i - 1), cur = a.site(i);
            const bool less = prev[0] < cur[0] || (prev[0] == cur[0] && prev[1] < cur[1]);
            CHECK(less);
        }
    }
}
