#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rfsurface/lattice.hpp"

namespace rfs {

/**
 * Real-valued function on box + boundary, stored in site-index order.
 * The lattice must outlive the field.
 */
class Field {
  public:
    explicit Field(const Lattice& lat, double init = 0.0)
        : lat_(&lat), v_(static_cast<std::size_t>(lat.n_sites()), init) {}

    const Lattice& lattice() const { return *lat_; }
    std::int32_t size() const { return static_cast<std::int32_t>(v_.size()); }
    double operator[](std::int32_t i) const { return v_[i]; }
    double& operator[](std::int32_t i) { return v_[i]; }
    std::span<const double> values() const { return v_; }
    std::span<double> values() { return v_; }

    void set_zero() { std::fill(v_.begin(), v_.end(), 0.0); }
    void zero_boundary() {
        for (std::int32_t b : lat_->boundary_sites()) v_[b] = 0.0;
    }
    bool boundary_is_zero(double tol = 0.0) const;

  private:
    const Lattice* lat_;
    std::vector<double> v_;
};

/** Integer-valued counterpart used by the integer-height model. */
class IntField {
  public:
    explicit IntField(const Lattice& lat, int init = 0)
        : lat_(&lat), v_(static_cast<std::size_t>(lat.n_sites()), init) {}

    const Lattice& lattice() const { return *lat_; }
    std::int32_t size() const { return static_cast<std::int32_t>(v_.size()); }
    int operator[](std::int32_t i) const { return v_[i]; }
    int& operator[](std::int32_t i) { return v_[i]; }
    std::span<const int> values() const { return v_; }
    std::span<int> values() { return v_; }

  private:
    const Lattice* lat_;
    std::vector<int> v_;
};

Field to_real(const IntField& f);

/** gradient along an edge, oriented a -> b */
inline double grad(const Field& f, const Lattice::Edge& e) { return f[e.b] - f[e.a]; }
inline int grad(const IntField& f, const Lattice::Edge& e) { return f[e.b] - f[e.a]; }

/** sum over edges of the squared gradient */
double grad_norm_sq(const Field& f);
double grad_norm_sq(const IntField& f);

/** sum over interior sites of f * g */
double dot_interior(const Field& f, const Field& g);

/** sum over interior sites of f^2 */
double norm_sq_interior(const Field& f);
double norm_sq_interior(const IntField& f);

}  // namespace rfs
