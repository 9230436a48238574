#pragma once

#include <span>
#include <string>
#include <vector>

namespace rfs {

/** Mean and standard error of correlated samples via non-overlapping batch means. */
struct BatchStats {
    double mean = 0.0;
    double se = 0.0;
    long n_samples = 0;
    int n_batches = 0;
};

BatchStats batch_means(std::span<const double> samples, int n_batches = 20);

/** Plain iid mean with standard error of the mean. */
BatchStats sample_mean(std::span<const double> values);

/** Delete-1 jackknife standard error for the (biased, 1/n) sample variance. */
double jackknife_se_of_variance(std::span<const double> values);

/** Biased (1/n) sample variance; pairs with jackknife_se_of_variance. */
double plugin_variance(std::span<const double> values);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double r_squared = 0.0;
    double rss = 0.0;  // residual sum of squares in the fitted space
};

/** Least squares y = a + b x. Weights are inverse variances; empty = unweighted. */
LineFit linear_fit(std::span<const double> x, std::span<const double> y,
                   std::span<const double> w = {});

struct Quadrature {
    std::vector<double> nodes;    // on [0,1]
    std::vector<double> weights;  // sum to 1
};

/** Gauss-Legendre rule mapped to [0,1]; exact for polynomials of degree 2n-1. */
Quadrature gauss_legendre(int n);

/** Streaming log(sum(exp(x_i))) without overflow. */
class LogSumExp {
  public:
    void add(double x);
    void add_scaled(double x, double coeff);  // coeff * exp(x), coeff > 0
    double value() const;
    long count() const { return n_; }

  private:
    double max_ = -1e308;
    double sum_ = 0.0;
    long n_ = 0;
};

}  // namespace rfs
