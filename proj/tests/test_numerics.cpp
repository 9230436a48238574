#include "doctest.h"

#include <stdexcept>
#include <cmath>
#include <vector>

#include "rfsurface/numerics.hpp"

using namespace rfs;

TEST_CASE("sample_mean matches hand computation") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    const auto s = sample_mean(v);
    CHECK(s.mean == doctest::Approx(2.5));
    // se = sqrt(sum (x-m)^2 / (n (n-1))) = sqrt(5/12)
    CHECK(s.se == doctest::Approx(std::sqrt(5.0 / 12.0)));
    CHECK(s.n_samples == 4);
}

TEST_CASE("sample_mean edge cases") {
    const std::vector<double> empty;
    CHECK(sample_mean(empty).n_samples == 0);
    const std::vector<double> one{7.0};
    CHECK(sample_mean(one).mean == doctest::Approx(7.0));
    CHECK(sample_mean(one).se == 0.0);
}

TEST_CASE("batch_means agrees with sample_mean on iid-like data") {
    std::vector<double> v(200);
    for (int i = 0; i < 200; ++i) v[i] = std::sin(0.7 * i) + 0.01 * i;
    const auto b = batch_means(v, 20);
    const auto s = sample_mean(v);
    CHECK(b.mean == doctest::Approx(s.mean));
    CHECK(b.n_samples == 200);
    CHECK(b.n_batches == 20);
    CHECK(b.se > 0.0);
}

TEST_CASE("batch_means drops the trailing remainder") {
    std::vector<double> v(23, 1.0);
    v.back() = 1000.0;  // falls in the dropped tail for 22 kept samples
    const auto b = batch_means(v, 11);
    CHECK(b.n_samples == 22);
    CHECK(b.mean == doctest::Approx(1.0));
    CHECK(b.se == doctest::Approx(0.0));
}

TEST_CASE("batch_means inflates the error bar for strongly correlated samples") {
    // slow square wave: naive iid se wildly underestimates; batches see it
    std::vector<double> v(400);
    for (int i = 0; i < 400; ++i) v[i] = (i / 100) % 2 == 0 ? 1.0 : -1.0;
    const auto b = batch_means(v, 8);
    const auto s = sample_mean(v);
    CHECK(b.se > 5.0 * s.se);
}

TEST_CASE("plugin_variance and its jackknife standard error") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    CHECK(plugin_variance(v) == doctest::Approx(1.25));

    // independent recomputation of the delete-1 jackknife
    const long n = static_cast<long>(v.size());
    std::vector<double> loo;
    for (long i = 0; i < n; ++i) {
        std::vector<double> rest;
        for (long j = 0; j < n; ++j)
            if (j != i) rest.push_back(v[j]);
        loo.push_back(plugin_variance(rest));
    }
    double lm = 0.0;
    for (double t : loo) lm += t;
    lm /= static_cast<double>(n);
    double ss = 0.0;
    for (double t : loo) ss += (t - lm) * (t - lm);
    const double expect = std::sqrt(ss * static_cast<double>(n - 1) / static_cast<double>(n));
    CHECK(jackknife_se_of_variance(v) == doctest::Approx(expect).epsilon(1e-12));
    const std::vector<double> two{1.0, 2.0};
    CHECK(jackknife_se_of_variance(two) == 0.0);
}

TEST_CASE("linear_fit recovers an exact line") {
    std::vector<double> x{1, 2, 3, 4, 5}, y;
    for (double t : x) y.push_back(2.0 * t + 1.0);
    const auto f = linear_fit(x, y);
    CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(f.intercept == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(f.rss == doctest::Approx(0.0).epsilon(1e-18));
    CHECK(f.slope_se == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("linear_fit with weights reproduces the weighted normal equations") {
    const std::vector<double> x{0, 1, 2}, y{0.0, 1.0, 1.0}, w{1.0, 4.0, 1.0};
    double sw = 6, sx = 0 * 1 + 1 * 4 + 2 * 1, sy = 0 + 4 + 1;
    const double xbar = sx / sw, ybar = sy / sw;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < 3; ++i) {
        sxx += w[i] * (x[i] - xbar) * (x[i] - xbar);
        sxy += w[i] * (x[i] - xbar) * (y[i] - ybar);
    }
    const auto f = linear_fit(x, y, w);
    CHECK(f.slope == doctest::Approx(sxy / sxx).epsilon(1e-14));
    CHECK(f.intercept == doctest::Approx(ybar - f.slope * xbar).epsilon(1e-14));
}

TEST_CASE("linear_fit rejects bad inputs") {
    const std::vector<double> x{1, 2}, y{1};
    CHECK_THROWS_AS(linear_fit(x, y), std::invalid_argument);
    const std::vector<double> x1{1}, y1{1};
    CHECK_THROWS_AS(linear_fit(x1, y1), std::invalid_argument);
    const std::vector<double> xs{3, 3, 3}, ys{1, 2, 3};
    CHECK_THROWS_AS(linear_fit(xs, ys), std::invalid_argument);
}

TEST_CASE("gauss_legendre is exact through degree 2n-1") {
    for (int n : {2, 4, 8}) {
        const auto q = gauss_legendre(n);
        REQUIRE(q.nodes.size() == static_cast<std::size_t>(n));
        double wsum = 0.0;
        for (double w : q.weights) wsum += w;
        CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
        for (double t : q.nodes) {
            CHECK(t > 0.0);
            CHECK(t < 1.0);
        }
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double integral = 0.0;
            for (int i = 0; i < n; ++i) integral += q.weights[i] * std::pow(q.nodes[i], k);
            CHECK(integral == doctest::Approx(1.0 / (k + 1)).epsilon(1e-12));
        }
    }
}

TEST_CASE("LogSumExp handles large offsets and scaled terms") {
    LogSumExp lse;
    lse.add(0.0);
    lse.add(std::log(2.0));
    CHECK(lse.value() == doctest::Approx(std::log(3.0)).epsilon(1e-14));
    CHECK(lse.count() == 2);

    LogSumExp big;
    big.add(1000.0);
    big.add(1000.5);
    CHECK(big.value() == doctest::Approx(1000.5 + std::log1p(std::exp(-0.5))).epsilon(1e-14));

    LogSumExp scaled;
    scaled.add_scaled(2.0, 3.0);  // 3 e^2
    scaled.add(2.0);              // + e^2
    CHECK(scaled.value() == doctest::Approx(2.0 + std::log(4.0)).epsilon(1e-14));
}
