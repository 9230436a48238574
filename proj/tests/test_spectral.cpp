#include "doctest.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "rfsurface/numerics.hpp"
#include "rfsurface/spectral.hpp"
#include "support/oracles.hpp"

using namespace rfs;

TEST_CASE("path eigenvalues match the dense Dirichlet laplacian") {
    const Lattice lat(1, 3);  // 7-site path
    const Eigen::MatrixXd A = oracle::dense_laplacian(lat);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    REQUIRE(es.info() == Eigen::Success);
    std::vector<double> mine;
    for (int j = 1; j <= 7; ++j) mine.push_back(spectral::path_eigenvalue(j, 7));
    std::sort(mine.begin(), mine.end());
    for (int j = 0; j < 7; ++j)
        CHECK(mine[j] == doctest::Approx(es.eigenvalues()[j]).epsilon(1e-12));
}

TEST_CASE("product eigenvalues: d=2 spectrum is a sum of path eigenvalues") {
    const Lattice lat(2, 2);  // 25 interior sites
    const Eigen::MatrixXd A = oracle::dense_laplacian(lat);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    REQUIRE(es.info() == Eigen::Success);
    std::vector<double> tensor;
    for (int j = 1; j <= 5; ++j)
        for (int k = 1; k <= 5; ++k)
            tensor.push_back(spectral::path_eigenvalue(j, 5) +
                             spectral::path_eigenvalue(k, 5));
    std::sort(tensor.begin(), tensor.end());
    for (int i = 0; i < 25; ++i)
        CHECK(tensor[i] == doctest::Approx(es.eigenvalues()[i]).epsilon(1e-12));
}

TEST_CASE("green trace: closed form vs dense inverse") {
    // d=1: an n-site path has trace G = n(n+2)/6
    CHECK(spectral::green_trace(1, 16) == doctest::Approx(33.0 * 35.0 / 6.0).epsilon(1e-13));
    for (int d = 1; d <= 3; ++d) {
        const int L = d == 3 ? 1 : 2;
        const Lattice lat(d, L);
        const Eigen::MatrixXd G = oracle::dense_green(lat);
        CHECK(spectral::green_trace(d, L) == doctest::Approx(G.trace()).epsilon(1e-11));
    }
}

TEST_CASE("green powers at the center vs dense linear algebra") {
    // d=1, L=1: columns of G are (3/4,1/2,1/4), (1/2,1,1/2), (1/4,1/2,3/4)
    CHECK(spectral::green_power_center(1, 1, 1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(spectral::green_power_center(1, 1, 2) == doctest::Approx(1.5).epsilon(1e-14));

    for (int d : {1, 2}) {
        const Lattice lat(d, 2);
        const Eigen::MatrixXd G = oracle::dense_green(lat);
        const Eigen::MatrixXd G2 = G * G;
        const Eigen::MatrixXd G3 = G2 * G;
        const std::int32_t r = lat.interior_rank(lat.center());
        CHECK(spectral::green_power_center(d, 2, 1) ==
              doctest::Approx(G(r, r)).epsilon(1e-11));
        CHECK(spectral::green_power_center(d, 2, 2) ==
              doctest::Approx(G2(r, r)).epsilon(1e-11));
        CHECK(spectral::green_power_center(d, 2, 3) ==
              doctest::Approx(G3(r, r)).epsilon(1e-11));
    }
}

TEST_CASE("green power diagonal: interior-rank order and trace consistency") {
    const Lattice lat(2, 2);
    const auto diag = spectral::green_power_diag(2, 2, 1);
    REQUIRE(diag.size() == static_cast<std::size_t>(lat.n_interior()));
    const Eigen::MatrixXd G = oracle::dense_green(lat);
    for (std::int32_t r = 0; r < lat.n_interior(); ++r)
        CHECK(diag[r] == doctest::Approx(G(r, r)).epsilon(1e-11));
    double tr = 0.0;
    for (double g : diag) tr += g;
    CHECK(tr == doctest::Approx(spectral::green_trace(2, 2)).epsilon(1e-12));
}

TEST_CASE("gff sampler replays and is pinned to zero on the boundary") {
    const Lattice lat(2, 3);
    const SeedSpec seed{19, 4, Purpose::GffMode};
    const Field a = spectral::sample_gff(lat, seed);
    const Field b = spectral::sample_gff(lat, seed);
    for (std::int32_t i = 0; i < lat.n_sites(); ++i) CHECK(a[i] == b[i]);
    CHECK(a.boundary_is_zero());
    const Field c = spectral::sample_gff(lat, seed.with_realization(5));
    CHECK(norm_sq_interior(a) != norm_sq_interior(c));
}

TEST_CASE("gff covariance matches the green function") {
    const Lattice lat(1, 1);
    const std::int32_t c = lat.center();
    const int coords[] = {1};
    const std::int32_t nb = lat.index_of(coords);
    const SeedSpec seed{23, 0, Purpose::GffMode};
    const int n = 30000;
    std::vector<double> var_c(n), cov_cn(n), var_n(n);
    for (int r = 0; r < n; ++r) {
        const Field phi = spectral::sample_gff(lat, seed.with_realization(r));
        var_c[r] = phi[c] * phi[c];
        cov_cn[r] = phi[c] * phi[nb];
        var_n[r] = phi[nb] * phi[nb];
    }
    const auto s0 = sample_mean(var_c), s1 = sample_mean(cov_cn), s2 = sample_mean(var_n);
    CHECK(std::abs(s0.mean - 1.0) < 5.0 * s0.se);   // G(0,0) = 1
    CHECK(std::abs(s1.mean - 0.5) < 5.0 * s1.se);   // G(0,1) = 1/2
    CHECK(std::abs(s2.mean - 0.75) < 5.0 * s2.se);  // G(1,1) = 3/4
}
