#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace rfs {

int linf_distance(std::span<const int> x, std::span<const int> y);

/**
 * Box Lambda_L = {-L..L}^d together with its outer vertex boundary and the
 * edge set E: every lattice edge with at least one interior endpoint
 * (boundary-boundary edges carry no gradient under zero boundary data and
 * are excluded). Sites are indexed lexicographically by coordinates, so
 * enumeration order is identical across runs and platforms.
 */
class Lattice {
  public:
    struct Edge {
        std::int32_t a, b;  // site indices, a < b
    };
    struct DirectedEdge {
        std::int32_t from, to;
    };
    struct Incidence {
        std::int32_t neighbor;  // site index
        std::int32_t edge;      // edge index
    };

    Lattice(int d, int L);

    int dim() const { return d_; }
    int side() const { return L_; }
    std::int32_t n_sites() const { return n_sites_; }        // |box + boundary|
    std::int32_t n_interior() const { return n_interior_; }  // |box|
    std::int32_t n_edges() const { return static_cast<std::int32_t>(edges_.size()); }

    std::span<const int> site(std::int32_t idx) const {
        return {coords_.data() + static_cast<std::size_t>(idx) * d_, static_cast<std::size_t>(d_)};
    }
    bool is_interior(std::int32_t idx) const { return interior_rank_[idx] >= 0; }
    /** rank of a site within the interior ordering, -1 for boundary sites */
    std::int32_t interior_rank(std::int32_t idx) const { return interior_rank_[idx]; }
    /** site index from coordinates, -1 if outside box+boundary */
    std::int32_t index_of(std::span<const int> coords) const;
    std::int32_t center() const { return center_; }

    std::span<const std::int32_t> interior_sites() const { return interior_sites_; }
    std::span<const std::int32_t> boundary_sites() const { return boundary_sites_; }
    std::span<const Edge> edges() const { return edges_; }

    /** the 2d incidences of the interior site with this rank, fixed order */
    std::span<const Incidence> star_of_rank(std::int32_t rank) const {
        return {star_.data() + static_cast<std::size_t>(rank) * 2 * d_,
                static_cast<std::size_t>(2 * d_)};
    }
    /** directed edges out of interior site x; throws if x is not interior */
    std::vector<DirectedEdge> directed_star(std::int32_t x) const;

    /** max-norm distance of a site from the origin */
    int linf_radius(std::int32_t idx) const;

  private:
    int d_, L_;
    std::int32_t n_sites_ = 0, n_interior_ = 0, center_ = -1;
    std::vector<int> coords_;                   // n_sites x d, lex sorted
    std::vector<std::int32_t> interior_rank_;   // -1 on boundary
    std::vector<std::int32_t> interior_sites_;  // ascending site index
    std::vector<std::int32_t> boundary_sites_;
    std::vector<Edge> edges_;       // sorted by (a, b)
    std::vector<Incidence> star_;   // n_interior x 2d
};

/** convenience factory mirroring the constructor */
inline Lattice build_box(int d, int L) { return Lattice(d, L); }

}  // namespace rfs
