#include "rfsurface/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace rfs {

int linf_distance(std::span<const int> x, std::span<const int> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("linf_distance: dimension mismatch");
    int m = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        m = std::max(m, std::abs(x[i] - y[i]));
    return m;
}

namespace {

bool lex_less(const int* a, const int* b, int d) {
    for (int i = 0; i < d; ++i) {
        if (a[i] != b[i]) return a[i] < b[i];
    }
    return false;
}

}  // namespace

Lattice::Lattice(int d, int L) : d_(d), L_(L) {
    if (d < 1) throw std::invalid_argument("Lattice: dimension must be >= 1");
    if (L < 0) throw std::invalid_argument("Lattice: side must be >= 0");
    const long long n1 = 2LL * L + 1;
    long long interior = 1;
    long long per_face = 1;  // (2L+1)^(d-1)
    for (int i = 0; i < d; ++i) {
        interior *= n1;
        if (i < d - 1) per_face *= n1;
        if (interior > std::numeric_limits<std::int32_t>::max())
            throw std::invalid_argument("Lattice: site count overflows 32-bit index");
    }
    const long long total = interior + 2LL * d * per_face;
    if (total > std::numeric_limits<std::int32_t>::max())
        throw std::invalid_argument("Lattice: site count overflows 32-bit index");

    n_interior_ = static_cast<std::int32_t>(interior);
    n_sites_ = static_cast<std::int32_t>(total);
    coords_.resize(static_cast<std::size_t>(total) * d);

    // interior sites by odometer, then one face-bump per axis and sign
    std::vector<int> c(d, -L);
    std::size_t w = 0;
    for (long long k = 0; k < interior; ++k) {
        for (int i = 0; i < d; ++i) coords_[w++] = c[i];
        for (int i = d - 1; i >= 0; --i) {
            if (++c[i] <= L) break;
            c[i] = -L;
        }
    }
    for (int axis = 0; axis < d; ++axis) {
        for (int sign = -1; sign <= 1; sign += 2) {
            std::fill(c.begin(), c.end(), -L);
            for (long long k = 0; k < per_face; ++k) {
                int j = 0;
                for (int i = 0; i < d; ++i) {
                    if (i == axis) {
                        coords_[w + i] = sign * (L + 1);
                    } else {
                        coords_[w + i] = c[j++];
                    }
                }
                w += d;
                for (int i = d - 2; i >= 0; --i) {
                    if (++c[i] <= L) break;
                    c[i] = -L;
                }
            }
        }
    }

    // lex sort of site rows via an index permutation
    std::vector<std::int32_t> perm(n_sites_);
    for (std::int32_t i = 0; i < n_sites_; ++i) perm[i] = i;
    std::sort(perm.begin(), perm.end(), [&](std::int32_t a, std::int32_t b) {
        return lex_less(coords_.data() + static_cast<std::size_t>(a) * d,
                        coords_.data() + static_cast<std::size_t>(b) * d, d);
    });
    std::vector<int> sorted(coords_.size());
    for (std::int32_t i = 0; i < n_sites_; ++i) {
        const int* src = coords_.data() + static_cast<std::size_t>(perm[i]) * d;
        std::copy(src, src + d, sorted.begin() + static_cast<std::size_t>(i) * d);
    }
    coords_ = std::move(sorted);

    interior_rank_.assign(n_sites_, -1);
    interior_sites_.reserve(n_interior_);
    boundary_sites_.reserve(n_sites_ - n_interior_);
    for (std::int32_t i = 0; i < n_sites_; ++i) {
        const int* s = coords_.data() + static_cast<std::size_t>(i) * d;
        bool in = true;
        for (int k = 0; k < d; ++k)
            if (std::abs(s[k]) > L) in = false;
        if (in) {
            interior_rank_[i] = static_cast<std::int32_t>(interior_sites_.size());
            interior_sites_.push_back(i);
        } else {
            boundary_sites_.push_back(i);
        }
    }

    std::vector<int> probe(d);
    std::fill(probe.begin(), probe.end(), 0);
    center_ = index_of(probe);

    // edges with at least one interior endpoint, canonical (a < b) order
    edges_.reserve(static_cast<std::size_t>(n_interior_) * d);
    for (std::int32_t i = 0; i < n_sites_; ++i) {
        const int* s = coords_.data() + static_cast<std::size_t>(i) * d;
        std::copy(s, s + d, probe.begin());
        for (int axis = 0; axis < d; ++axis) {
            probe[axis] = s[axis] + 1;
            const std::int32_t j = index_of(probe);
            probe[axis] = s[axis];
            if (j < 0) continue;
            if (interior_rank_[i] < 0 && interior_rank_[j] < 0) continue;
            edges_.push_back({std::min(i, j), std::max(i, j)});
        }
    }
    std::sort(edges_.begin(), edges_.end(), [](const Edge& x, const Edge& y) {
        return x.a != y.a ? x.a < y.a : x.b < y.b;
    });

    star_.assign(static_cast<std::size_t>(n_interior_) * 2 * d, Incidence{-1, -1});
    std::vector<int> fill(n_interior_, 0);
    for (std::int32_t e = 0; e < n_edges(); ++e) {
        for (const std::int32_t end : {edges_[e].a, edges_[e].b}) {
            const std::int32_t r = interior_rank_[end];
            if (r < 0) continue;
            const std::int32_t other = end == edges_[e].a ? edges_[e].b : edges_[e].a;
            star_[static_cast<std::size_t>(r) * 2 * d + fill[r]] = {other, e};
            ++fill[r];
        }
    }
    for (std::int32_t r = 0; r < n_interior_; ++r) {
        if (fill[r] != 2 * d)
            throw std::logic_error("Lattice: interior star must have 2d edges");
    }
}

std::int32_t Lattice::index_of(std::span<const int> coords) const {
    if (static_cast<int>(coords.size()) != d_)
        throw std::invalid_argument("Lattice::index_of: dimension mismatch");
    std::int32_t lo = 0, hi = n_sites_;
    while (lo < hi) {
        const std::int32_t mid = lo + (hi - lo) / 2;
        if (lex_less(coords_.data() + static_cast<std::size_t>(mid) * d_, coords.data(), d_))
            lo = mid + 1;
        else
            hi = mid;
    }
    if (lo >= n_sites_) return -1;
    const int* s = coords_.data() + static_cast<std::size_t>(lo) * d_;
    for (int i = 0; i < d_; ++i)
        if (s[i] != coords[i]) return -1;
    return lo;
}

std::vector<Lattice::DirectedEdge> Lattice::directed_star(std::int32_t x) const {
    const std::int32_t r = interior_rank_[x];
    if (r < 0)
        throw std::invalid_argument("directed_star: site is not interior");
    std::vector<DirectedEdge> out;
    out.reserve(2 * d_);
    for (const Incidence& inc : star_of_rank(r)) out.push_back({x, inc.neighbor});
    return out;
}

int Lattice::linf_radius(std::int32_t idx) const {
    const auto s = site(idx);
    int m = 0;
    for (int v : s) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace rfs
