#include "rfsurface/potential.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rfs {

Potential Potential::quadratic(double kappa) {
    if (kappa <= 0.0) throw std::invalid_argument("quadratic: kappa > 0 required");
    Potential p;
    p.kind_ = Kind::Quadratic;
    p.kappa_ = kappa;
    p.c_minus_ = p.c_plus_ = kappa;
    p.name_ = "quadratic:" + std::to_string(kappa);
    return p;
}

Potential Potential::quad_plus_sqrt(double kappa) {
    if (kappa < 0.0) throw std::invalid_argument("quad_plus_sqrt: kappa >= 0 required");
    Potential p;
    p.kind_ = Kind::QuadPlusSqrt;
    p.kappa_ = kappa;
    p.c_minus_ = 1.0;
    p.c_plus_ = 1.0 + kappa;
    p.name_ = "qsqrt:" + std::to_string(kappa);
    return p;
}

Potential Potential::table(std::vector<double> x, std::vector<double> v) {
    if (x.size() != v.size() || x.size() < 3)
        throw std::invalid_argument("table: need >= 3 nodes with matching values");
    for (std::size_t i = 1; i < x.size(); ++i)
        if (x[i] <= x[i - 1]) throw std::invalid_argument("table: nodes must increase");
    Potential p;
    p.kind_ = Kind::Table;
    p.tx_ = std::move(x);
    p.tv_ = std::move(v);
    // declared bounds from the table's own second differences
    double lo = 1e308, hi = -1e308;
    for (std::size_t i = 1; i + 1 < p.tx_.size(); ++i) {
        const double hl = p.tx_[i] - p.tx_[i - 1], hr = p.tx_[i + 1] - p.tx_[i];
        const double dd = 2.0 * (hl * p.tv_[i + 1] + hr * p.tv_[i - 1] - (hl + hr) * p.tv_[i]) /
                          (hl * hr * (hl + hr));
        lo = std::min(lo, dd);
        hi = std::max(hi, dd);
    }
    p.c_minus_ = lo;
    p.c_plus_ = hi;
    p.name_ = "table";
    return p;
}

Potential Potential::parse(const std::string& tag) {
    const auto colon = tag.find(':');
    const std::string head = tag.substr(0, colon);
    double arg = 1.0;
    if (colon != std::string::npos) {
        try {
            std::size_t used = 0;
            arg = std::stod(tag.substr(colon + 1), &used);
            if (used != tag.size() - colon - 1) throw std::invalid_argument("");
        } catch (...) {
            throw std::invalid_argument("potential: bad numeric argument in '" + tag + "'");
        }
    }
    if (head == "quadratic") return quadratic(arg);
    if (head == "qsqrt" || head == "quad_plus_sqrt") return quad_plus_sqrt(arg);
    throw std::invalid_argument("potential: unknown tag '" + tag + "'");
}

Potential::Eval Potential::eval(double x) const {
    Eval e{};
    switch (kind_) {
        case Kind::Quadratic:
            e = {0.5 * kappa_ * x * x, kappa_ * x, kappa_};
            break;
        case Kind::QuadPlusSqrt: {
            const double s = std::sqrt(1.0 + x * x);
            e = {0.5 * x * x + kappa_ * s, x + kappa_ * x / s, 1.0 + kappa_ / (s * s * s)};
            break;
        }
        case Kind::Table: {
            // piecewise linear inside the table, linear continuation beyond
            const auto& X = tx_;
            const auto& V = tv_;
            auto it = std::upper_bound(X.begin(), X.end(), x);
            std::size_t i = it == X.begin() ? 1 : static_cast<std::size_t>(it - X.begin());
            if (i >= X.size()) i = X.size() - 1;
            const double h = X[i] - X[i - 1];
            const double t = (x - X[i - 1]) / h;
            const double slope = (V[i] - V[i - 1]) / h;
            double ddv = 0.0;
            if (i + 1 < X.size()) {
                const double hr = X[i + 1] - X[i];
                ddv = 2.0 * ((V[i + 1] - V[i]) / hr - slope) / (h + hr);
            } else if (i >= 2) {
                const double hl = X[i - 1] - X[i - 2];
                ddv = 2.0 * (slope - (V[i - 1] - V[i - 2]) / hl) / (h + hl);
            }
            e = {V[i - 1] + t * (V[i] - V[i - 1]), slope, ddv};
            break;
        }
    }
    e.v *= scale_;
    e.dv *= scale_;
    e.ddv *= scale_;
    return e;
}

Potential Potential::scaled(double s) const {
    if (s <= 0.0) throw std::invalid_argument("Potential::scaled: s > 0 required");
    Potential p = *this;
    p.scale_ = scale_ * s;
    p.c_minus_ = c_minus_ * s;
    p.c_plus_ = c_plus_ * s;
    p.name_ = name_ + "*" + std::to_string(s);
    return p;
}

EllipticityReport check_ellipticity(const Potential& pot, std::span<const double> grid) {
    EllipticityReport r;
    r.c_minus = pot.c_minus();
    r.c_plus = pot.c_plus();
    r.product_lower = r.product_upper = 1e308;
    r.curvature_lower = r.curvature_upper = 1e308;
    r.evenness = 0.0;
    for (double x : grid) {
        const auto e = pot.eval(x);
        const auto em = pot.eval(-x);
        r.evenness = std::max(r.evenness, std::abs(e.v - em.v));
        r.product_lower = std::min(r.product_lower, e.dv * x - r.c_minus * x * x);
        r.product_upper = std::min(r.product_upper, r.c_plus * x * x - e.dv * x);
        r.curvature_lower = std::min(r.curvature_lower, e.ddv - r.c_minus);
        r.curvature_upper = std::min(r.curvature_upper, r.c_plus - e.ddv);
    }
    return r;
}

EllipticityReport check_ellipticity(const Potential& pot, double x_max, int n) {
    std::vector<double> grid(n);
    for (int i = 0; i < n; ++i)
        grid[i] = -x_max + 2.0 * x_max * static_cast<double>(i) / (n - 1);
    return check_ellipticity(pot, grid);
}

}  // namespace rfs
