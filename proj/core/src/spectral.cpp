#include "rfsurface/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rfs::spectral {

namespace {

// odometer over {0..n-1}^d, last axis fastest; returns false after the last tuple
bool advance(std::vector<int>& k, int n) {
    for (int i = static_cast<int>(k.size()) - 1; i >= 0; --i) {
        if (++k[i] < n) return true;
        k[i] = 0;
    }
    return false;
}

double mode_eigenvalue(const std::vector<int>& k, int n) {
    double s = 0.0;
    for (int ki : k) s += path_eigenvalue(ki + 1, n);
    return s;
}

// apply an n x n matrix along one tensor axis (axis d-1 is fastest)
void apply_matrix_axis(std::vector<double>& t, int d, int n, int axis,
                       const std::vector<double>& m) {
    std::size_t stride = 1;
    for (int a = d - 1; a > axis; --a) stride *= n;
    const std::size_t block = stride * n;
    const std::size_t total = t.size();
    std::vector<double> line(n), out(n);
    for (std::size_t base = 0; base < total; base += block) {
        for (std::size_t off = 0; off < stride; ++off) {
            for (int i = 0; i < n; ++i) line[i] = t[base + off + stride * i];
            for (int i = 0; i < n; ++i) {
                double s = 0.0;
                const double* row = m.data() + static_cast<std::size_t>(i) * n;
                for (int k = 0; k < n; ++k) s += row[k] * line[k];
                out[i] = s;
            }
            for (int i = 0; i < n; ++i) t[base + off + stride * i] = out[i];
        }
    }
}

std::vector<double> sine_matrix(int n) {
    std::vector<double> s(static_cast<std::size_t>(n) * n);
    const double norm = std::sqrt(2.0 / (n + 1.0));
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            s[static_cast<std::size_t>(i) * n + k] =
                norm * std::sin(std::numbers::pi * (i + 1.0) * (k + 1.0) / (n + 1.0));
    return s;
}

}  // namespace

double path_eigenvalue(int j, int n) {
    if (j < 1 || j > n) throw std::invalid_argument("path_eigenvalue: j in 1..n");
    const double s = std::sin(std::numbers::pi * j / (2.0 * (n + 1.0)));
    return 4.0 * s * s;
}

double green_trace(int d, int L) {
    const int n = 2 * L + 1;
    std::vector<int> k(d, 0);
    double tr = 0.0;
    do {
        tr += 1.0 / mode_eigenvalue(k, n);
    } while (advance(k, n));
    return tr;
}

double green_power_center(int d, int L, int p) {
    const int n = 2 * L + 1;
    // center weight per axis: (2/(n+1)) sin^2(pi j (L+1)/(n+1))
    std::vector<double> wc(n);
    for (int j = 1; j <= n; ++j) {
        const double s = std::sin(std::numbers::pi * j * (L + 1.0) / (n + 1.0));
        wc[j - 1] = 2.0 / (n + 1.0) * s * s;
    }
    std::vector<int> k(d, 0);
    double out = 0.0;
    do {
        double w = 1.0;
        for (int ki : k) w *= wc[ki];
        if (w != 0.0) out += w * std::pow(mode_eigenvalue(k, n), -p);
    } while (advance(k, n));
    return out;
}

std::vector<double> green_power_diag(int d, int L, int p) {
    const int n = 2 * L + 1;
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= n;
    std::vector<double> t(total);
    std::vector<int> k(d, 0);
    std::size_t idx = 0;
    do {
        t[idx++] = std::pow(mode_eigenvalue(k, n), -p);
    } while (advance(k, n));
    // contract with squared sine weights along every axis
    auto s = sine_matrix(n);
    for (double& v : s) v = v * v;
    for (int a = 0; a < d; ++a) apply_matrix_axis(t, d, n, a, s);
    return t;
}

Field sample_gff(const Lattice& lat, const SeedSpec& seed) {
    const int d = lat.dim(), L = lat.side(), n = 2 * L + 1;
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= n;
    std::vector<double> t(total);
    CounterRng rng(SeedSpec{seed.base_seed, seed.realization, Purpose::GffMode}, 0);
    std::vector<int> k(d, 0);
    std::size_t idx = 0;
    do {
        t[idx++] = rng.next_gaussian() / std::sqrt(mode_eigenvalue(k, n));
    } while (advance(k, n));
    const auto s = sine_matrix(n);
    for (int a = 0; a < d; ++a) apply_matrix_axis(t, d, n, a, s);
    Field out(lat);
    const auto interior = lat.interior_sites();
    if (interior.size() != total) throw std::logic_error("sample_gff: size mismatch");
    for (std::size_t i = 0; i < total; ++i) out[interior[i]] = t[i];
    return out;
}

}  // namespace rfs::spectral
