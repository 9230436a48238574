#include "rfsurface/numerics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rfs {

BatchStats batch_means(std::span<const double> samples, int n_batches) {
    BatchStats out;
    const long n = static_cast<long>(samples.size());
    if (n == 0) return out;
    int nb = n_batches;
    if (nb < 2) nb = 2;
    if (nb > n) nb = static_cast<int>(n);
    const long m = n / nb;  // batch length; trailing remainder dropped
    if (m == 0) return sample_mean(samples);
    const long kept = m * nb;
    double total = 0.0;
    std::vector<double> bm(nb, 0.0);
    for (int b = 0; b < nb; ++b) {
        double s = 0.0;
        for (long i = 0; i < m; ++i) s += samples[b * m + i];
        bm[b] = s / static_cast<double>(m);
        total += s;
    }
    out.mean = total / static_cast<double>(kept);
    double ss = 0.0;
    for (int b = 0; b < nb; ++b) ss += (bm[b] - out.mean) * (bm[b] - out.mean);
    out.se = std::sqrt(ss / (static_cast<double>(nb) * (nb - 1.0)));
    out.n_samples = kept;
    out.n_batches = nb;
    return out;
}

BatchStats sample_mean(std::span<const double> values) {
    BatchStats out;
    const long n = static_cast<long>(values.size());
    out.n_samples = n;
    out.n_batches = static_cast<int>(n > 0 ? 1 : 0);
    if (n == 0) return out;
    double s = 0.0;
    for (double v : values) s += v;
    out.mean = s / static_cast<double>(n);
    if (n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.se = std::sqrt(ss / (static_cast<double>(n) * (n - 1.0)));
    }
    return out;
}

double plugin_variance(std::span<const double> values) {
    const long n = static_cast<long>(values.size());
    if (n == 0) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return ss / static_cast<double>(n);
}

double jackknife_se_of_variance(std::span<const double> values) {
    const long n = static_cast<long>(values.size());
    if (n < 3) return 0.0;
    // Leave-one-out plugin variances from sufficient statistics.
    double s1 = 0.0, s2 = 0.0;
    for (double v : values) {
        s1 += v;
        s2 += v * v;
    }
    std::vector<double> loo(n, 0.0);
    const double m = static_cast<double>(n - 1);
    double loo_mean = 0.0;
    for (long i = 0; i < n; ++i) {
        const double t1 = s1 - values[i];
        const double t2 = s2 - values[i] * values[i];
        loo[i] = t2 / m - (t1 / m) * (t1 / m);
        loo_mean += loo[i];
    }
    loo_mean /= static_cast<double>(n);
    double ss = 0.0;
    for (long i = 0; i < n; ++i) ss += (loo[i] - loo_mean) * (loo[i] - loo_mean);
    return std::sqrt(ss * m / static_cast<double>(n));
}

LineFit linear_fit(std::span<const double> x, std::span<const double> y,
                   std::span<const double> w) {
    const size_t n = x.size();
    if (y.size() != n || (w.size() != 0 && w.size() != n))
        throw std::invalid_argument("linear_fit: size mismatch");
    if (n < 2) throw std::invalid_argument("linear_fit: need at least two points");
    auto wt = [&](size_t i) { return w.empty() ? 1.0 : w[i]; };
    double sw = 0, sx = 0, sy = 0;
    for (size_t i = 0; i < n; ++i) {
        sw += wt(i);
        sx += wt(i) * x[i];
        sy += wt(i) * y[i];
    }
    const double xbar = sx / sw, ybar = sy / sw;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxx += wt(i) * (x[i] - xbar) * (x[i] - xbar);
        sxy += wt(i) * (x[i] - xbar) * (y[i] - ybar);
    }
    LineFit f;
    if (sxx <= 0.0) throw std::invalid_argument("linear_fit: degenerate abscissae");
    f.slope = sxy / sxx;
    f.intercept = ybar - f.slope * xbar;
    double ss_res = 0, ss_tot = 0;
    for (size_t i = 0; i < n; ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += wt(i) * r * r;
        ss_tot += wt(i) * (y[i] - ybar) * (y[i] - ybar);
    }
    f.rss = ss_res;
    f.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    if (n > 2)
        f.slope_se = std::sqrt(ss_res / (static_cast<double>(n) - 2.0) / sxx);
    return f;
}

Quadrature gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n >= 1");
    Quadrature q;
    q.nodes.resize(n);
    q.weights.resize(n);
    // Newton iteration on P_n over [-1,1], then map to [0,1].
    for (int i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        q.nodes[i] = 0.5 * (1.0 - z);  // descending z -> ascending node
        q.weights[i] = 1.0 / ((1.0 - z * z) * pp * pp);
    }
    return q;
}

void LogSumExp::add(double x) { add_scaled(x, 1.0); }

void LogSumExp::add_scaled(double x, double coeff) {
    if (coeff <= 0.0) throw std::invalid_argument("LogSumExp: coeff > 0 required");
    const double lx = x + std::log(coeff);
    if (n_ == 0 || lx > max_) {
        sum_ = sum_ * std::exp(max_ - lx) + 1.0;
        max_ = lx;
    } else {
        sum_ += std::exp(lx - max_);
    }
    ++n_;
}

double LogSumExp::value() const {
    if (n_ == 0) return -1e308;
    return max_ + std::log(sum_);
}

}  // namespace rfs
