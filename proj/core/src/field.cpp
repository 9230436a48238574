#include "rfsurface/field.hpp"

#include <cmath>
#include <stdexcept>

namespace rfs {

bool Field::boundary_is_zero(double tol) const {
    for (std::int32_t b : lat_->boundary_sites())
        if (std::abs(v_[b]) > tol) return false;
    return true;
}

Field to_real(const IntField& f) {
    Field out(f.lattice());
    for (std::int32_t i = 0; i < f.size(); ++i) out[i] = static_cast<double>(f[i]);
    return out;
}

double grad_norm_sq(const Field& f) {
    double s = 0.0;
    for (const auto& e : f.lattice().edges()) {
        const double g = f[e.b] - f[e.a];
        s += g * g;
    }
    return s;
}

double grad_norm_sq(const IntField& f) {
    double s = 0.0;
    for (const auto& e : f.lattice().edges()) {
        const double g = static_cast<double>(f[e.b] - f[e.a]);
        s += g * g;
    }
    return s;
}

double dot_interior(const Field& f, const Field& g) {
    if (&f.lattice() != &g.lattice())
        throw std::invalid_argument("dot_interior: different lattices");
    double s = 0.0;
    for (std::int32_t i : f.lattice().interior_sites()) s += f[i] * g[i];
    return s;
}

double norm_sq_interior(const Field& f) {
    double s = 0.0;
    for (std::int32_t i : f.lattice().interior_sites()) s += f[i] * f[i];
    return s;
}

double norm_sq_interior(const IntField& f) {
    double s = 0.0;
    for (std::int32_t i : f.lattice().interior_sites()) {
        const double v = f[i];
        s += v * v;
    }
    return s;
}

}  // namespace rfs
