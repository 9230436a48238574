#include "rfsurface/ivgff.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "rfsurface/elliptic.hpp"
#include "rfsurface/numerics.hpp"

namespace rfs {

void IVGibbsSpec::validate() const {
    if (lattice == nullptr || eta == nullptr)
        throw std::invalid_argument("ivgff: lattice and eta are required");
    if (&eta->lattice() != lattice) throw std::invalid_argument("ivgff: eta lattice mismatch");
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw std::invalid_argument("ivgff: beta must be positive and finite");
    if (!(lambda >= 0.0)) throw std::invalid_argument("ivgff: lambda must be >= 0");
    if (band < 1) throw std::invalid_argument("ivgff: band must be >= 1");
}

double iv_energy(const IVGibbsSpec& spec, const IntField& phi) {
    spec.validate();
    const Lattice& lat = *spec.lattice;
    double elastic = 0.0;
    for (const auto& e : lat.edges()) {
        const double g = phi[e.b] - phi[e.a];
        elastic += 0.5 * g * g;
    }
    double coupling = 0.0;
    for (std::int32_t x : lat.interior_sites()) coupling += (*spec.eta)[x] * phi[x];
    return elastic - spec.lambda * coupling;
}

double iv_delta_energy(const IVGibbsSpec& spec, std::span<const int> interior,
                       std::int32_t rank, int step) {
    const Lattice& lat = *spec.lattice;
    const int d = lat.dim();
    double nbr_sum = 0.0;
    for (const auto& inc : lat.star_of_rank(rank)) {
        const std::int32_t nr = lat.interior_rank(inc.neighbor);
        nbr_sum += nr >= 0 ? interior[nr] : 0;
    }
    const double s = step;
    const double phix = interior[rank];
    const double site = (*spec.eta)[lat.interior_sites()[rank]];
    return s * (2.0 * d * phix - nbr_sum) + d * s * s - s * spec.lambda * site;
}

double metropolis_accept_probability(const IVGibbsSpec& spec, std::span<const int> interior,
                                     std::int32_t rank, int step) {
    if (std::abs(interior[rank] + step) > spec.band) return 0.0;
    const double dh = iv_delta_energy(spec, interior, rank, step);
    return std::min(1.0, std::exp(-spec.beta * dh));
}

MetropolisRun metropolis_sample(const IVGibbsSpec& spec, long sweeps, int thin,
                                const SeedSpec& seed, long burn_in) {
    spec.validate();
    if (sweeps < 1) throw std::invalid_argument("metropolis: sweeps >= 1 required");
    if (thin < 1) throw std::invalid_argument("metropolis: thin >= 1 required");
    if (burn_in < 0) burn_in = std::max<long>(10, sweeps / 5);

    const Lattice& lat = *spec.lattice;
    const std::int32_t n = lat.n_interior();
    const std::int32_t v = lat.interior_rank(lat.center());
    std::vector<int> state(static_cast<std::size_t>(n), 0);
    CounterRng rng(seed.with(Purpose::Metropolis), 0);

    MetropolisRun run;
    long accepted = 0, proposed = 0, touched = 0;
    std::vector<double> s_h, s_h2, s_zero, s_grad;
    for (long sweep = 0; sweep < burn_in + sweeps; ++sweep) {
        const bool measuring = sweep >= burn_in;
        for (std::int32_t r = 0; r < n; ++r) {
            const int step = rng.next_sign();
            const double p = metropolis_accept_probability(spec, state, r, step);
            const double coin = rng.next_uniform();
            if (coin < p) {
                state[r] += step;
                if (measuring) ++accepted;
            }
            if (measuring) ++proposed;
        }
        if (!measuring) continue;
        bool at_band = false;
        for (int h : state)
            if (std::abs(h) == spec.band) {
                at_band = true;
                break;
            }
        if (at_band) ++touched;
        if ((sweep - burn_in + 1) % thin == 0) {
            IntField f(lat, 0);
            for (std::int32_t r = 0; r < n; ++r) f[lat.interior_sites()[r]] = state[r];
            s_h.push_back(state[v]);
            s_h2.push_back(static_cast<double>(state[v]) * state[v]);
            s_zero.push_back(state[v] == 0 ? 1.0 : 0.0);
            s_grad.push_back(grad_norm_sq(f) / lat.n_sites());
            run.samples.push_back(std::move(f));
        }
    }

    const auto to_est = [](const BatchStats& b) {
        return McEstimate{b.mean, b.se, b.n_samples};
    };
    run.height_mean = to_est(batch_means(s_h));
    run.height_sq = to_est(batch_means(s_h2));
    run.zero_prob = to_est(batch_means(s_zero));
    run.grad_norm_avg = to_est(batch_means(s_grad));
    run.acceptance_rate = proposed > 0 ? static_cast<double>(accepted) / proposed : 0.0;
    run.band_touch_rate = sweeps > 0 ? static_cast<double>(touched) / sweeps : 0.0;
    run.band_flagged = run.band_touch_rate >= 1e-3;
    return run;
}

void for_each_config(const Lattice& lat, int band, std::span<const int> offset,
                     const std::function<void(std::span<const int>)>& visit) {
    const std::int32_t n = lat.n_interior();
    if (band < 1) throw std::invalid_argument("for_each_config: band >= 1 required");
    if (!offset.empty() && static_cast<std::int32_t>(offset.size()) != n)
        throw std::invalid_argument("for_each_config: offset size mismatch");
    const double total = std::pow(2.0 * band + 1.0, static_cast<double>(n));
    if (total > 2e8) throw std::invalid_argument("for_each_config: state space too large");

    const int width = 2 * band;
    std::vector<int> digit(static_cast<std::size_t>(n), 0);
    std::vector<int> phi(static_cast<std::size_t>(n));
    for (std::int32_t i = 0; i < n; ++i) phi[i] = -band + (offset.empty() ? 0 : offset[i]);
    while (true) {
        visit(phi);
        std::int32_t i = n - 1;
        while (i >= 0 && digit[i] == width) {
            digit[i] = 0;
            phi[i] -= width;
            --i;
        }
        if (i < 0) break;
        ++digit[i];
        ++phi[i];
    }
}

namespace {

struct EdgeRanks {
    std::int32_t a, b;  // interior ranks, -1 for boundary endpoints
};

std::vector<EdgeRanks> edge_ranks(const Lattice& lat) {
    std::vector<EdgeRanks> out;
    out.reserve(static_cast<std::size_t>(lat.n_edges()));
    for (const auto& e : lat.edges())
        out.push_back({lat.interior_rank(e.a), lat.interior_rank(e.b)});
    return out;
}

/** lambda * grad u per edge, u the unit-strength Gaussian ground state */
std::vector<double> gauge_gradient(const IVGibbsSpec& spec) {
    const Lattice& lat = *spec.lattice;
    std::vector<double> out(static_cast<std::size_t>(lat.n_edges()), 0.0);
    if (spec.lambda == 0.0) return out;
    const auto [u, rep] = solve_dirichlet(lat, *spec.eta, {1e-12, 0});
    if (!rep.converged) throw std::runtime_error("ivgff: ground-state solve did not converge");
    for (std::int32_t e = 0; e < lat.n_edges(); ++e)
        out[e] = spec.lambda * grad(u, lat.edges()[e]);
    return out;
}

}  // namespace

EnumerationResult exact_enumerate(const IVGibbsSpec& spec, bool with_edge_means) {
    spec.validate();
    const Lattice& lat = *spec.lattice;
    const std::int32_t n = lat.n_interior();
    if (std::pow(2.0 * spec.band + 1.0, static_cast<double>(n)) > 1e8)
        throw std::invalid_argument("exact_enumerate: state space exceeds 1e8");

    const auto er = edge_ranks(lat);
    const auto lamgu = gauge_gradient(spec);
    std::vector<double> site_eta(static_cast<std::size_t>(n));
    for (std::int32_t r = 0; r < n; ++r) site_eta[r] = (*spec.eta)[lat.interior_sites()[r]];
    const std::int32_t v = lat.interior_rank(lat.center());

    const auto energy = [&](std::span<const int> phi) {
        double elastic = 0.0, coupling = 0.0;
        for (const auto& e : er) {
            const double g = (e.b >= 0 ? phi[e.b] : 0) - (e.a >= 0 ? phi[e.a] : 0);
            elastic += 0.5 * g * g;
        }
        for (std::int32_t r = 0; r < n; ++r) coupling += site_eta[r] * phi[r];
        return elastic - spec.lambda * coupling;
    };
    const auto gauge_sq = [&](std::span<const int> phi) {
        double s = 0.0;
        for (std::size_t e = 0; e < er.size(); ++e) {
            const double g =
                (er[e].b >= 0 ? phi[er[e].b] : 0) - (er[e].a >= 0 ? phi[er[e].a] : 0) - lamgu[e];
            s += g * g;
        }
        return s;
    };

    EnumerationResult out;
    LogSumExp lse_z, lse_m, lse_g;
    double best = -1e308;
    long long count = 0;
    for_each_config(lat, spec.band, {}, [&](std::span<const int> phi) {
        const double w = -spec.beta * energy(phi);
        const double gsq = gauge_sq(phi);
        lse_z.add(w);
        lse_m.add(w + spec.beta / 8.0 * gsq);
        lse_g.add(-spec.beta / 2.0 * gsq);
        if (w > best) {
            best = w;
            out.mode.assign(phi.begin(), phi.end());
        }
        ++count;
    });
    out.n_configs = count;
    out.log_partition = lse_z.value();
    out.log_exp_moment = lse_m.value() - out.log_partition;
    out.fitted_C = out.log_exp_moment / ((1.0 + spec.beta) * lat.n_sites());
    out.log_gauge_sum = lse_g.value();

    // second pass: plain weighted moments, stabilized by the max log-weight
    double s1 = 0.0, sh = 0.0, sh2 = 0.0, sz = 0.0, sg = 0.0;
    std::vector<double> se(with_edge_means ? er.size() : 0, 0.0);
    for_each_config(lat, spec.band, {}, [&](std::span<const int> phi) {
        const double w = std::exp(-spec.beta * energy(phi) - best);
        s1 += w;
        sh += w * phi[v];
        sh2 += w * phi[v] * phi[v];
        if (phi[v] == 0) sz += w;
        double gn = 0.0;
        for (std::size_t e = 0; e < er.size(); ++e) {
            const double g =
                (er[e].b >= 0 ? phi[er[e].b] : 0) - (er[e].a >= 0 ? phi[er[e].a] : 0);
            gn += g * g;
            if (with_edge_means) se[e] += w * g;
        }
        sg += w * gn;
    });
    out.height_mean = sh / s1;
    out.height_sq = sh2 / s1;
    out.zero_prob = sz / s1;
    out.grad_norm_avg = sg / s1 / lat.n_sites();
    if (with_edge_means) {
        out.edge_grad_mean.resize(se.size());
        for (std::size_t e = 0; e < se.size(); ++e) out.edge_grad_mean[e] = se[e] / s1;
    }
    return out;
}

double log_gauge_sum(const IVGibbsSpec& spec, std::span<const int> offset) {
    spec.validate();
    const Lattice& lat = *spec.lattice;
    const auto er = edge_ranks(lat);
    const auto lamgu = gauge_gradient(spec);
    LogSumExp lse;
    for_each_config(lat, spec.band, offset, [&](std::span<const int> phi) {
        double s = 0.0;
        for (std::size_t e = 0; e < er.size(); ++e) {
            const double g =
                (er[e].b >= 0 ? phi[er[e].b] : 0) - (er[e].a >= 0 ? phi[er[e].a] : 0) - lamgu[e];
            s += g * g;
        }
        lse.add(-spec.beta / 2.0 * s);
    });
    return lse.value();
}

ConnectedSetFamily enumerate_connected_sets(const Lattice& lat, std::int32_t v, int max_sites,
                                            const Field& eta, double lambda) {
    if (!lat.is_interior(v))
        throw std::invalid_argument("enumerate_connected_sets: v must be interior");
    if (max_sites < 1 || max_sites > 14)
        throw std::invalid_argument("enumerate_connected_sets: max_sites must be in [1, 14]");
    if (&eta.lattice() != &lat)
        throw std::invalid_argument("enumerate_connected_sets: eta lattice mismatch");

    ConnectedSetFamily fam;
    fam.count_by_size.assign(static_cast<std::size_t>(max_sites) + 1, 0);
    fam.worst_margin = 1e308;

    std::vector<std::int32_t> current{v};
    std::vector<char> in_set(static_cast<std::size_t>(lat.n_sites()), 0);
    std::vector<char> banned(static_cast<std::size_t>(lat.n_sites()), 0);
    in_set[v] = 1;

    const auto interior_neighbors = [&](std::int32_t site, auto&& fn) {
        for (const auto& inc : lat.star_of_rank(lat.interior_rank(site)))
            if (lat.is_interior(inc.neighbor)) fn(inc.neighbor);
    };

    const auto record = [&]() {
        ConnectedSetRecord rec;
        rec.sites = current;
        std::sort(rec.sites.begin(), rec.sites.end());
        std::set<std::int32_t> bd;
        for (std::int32_t s : current)
            for (const auto& inc : lat.star_of_rank(lat.interior_rank(s)))
                if (!in_set[inc.neighbor]) bd.insert(inc.neighbor);
        rec.boundary_size = static_cast<int>(bd.size());
        rec.eta_sum = 0.0;
        for (std::int32_t s : current) rec.eta_sum += eta[s];
        const double margin = rec.boundary_size - lambda * std::abs(rec.eta_sum);
        fam.worst_margin = std::min(fam.worst_margin, margin);
        ++fam.count_by_size[current.size()];
        if (rec.boundary_size >= static_cast<int>(fam.count_by_boundary.size()))
            fam.count_by_boundary.resize(rec.boundary_size + 1, 0);
        ++fam.count_by_boundary[rec.boundary_size];
        fam.records.push_back(std::move(rec));
        if (fam.records.size() > 2'000'000)
            throw std::runtime_error("enumerate_connected_sets: family too large");
    };

    // grow-and-ban recursion: each candidate is either taken now or banned for
    // the rest of this branch, so every connected set is visited exactly once
    const std::function<void()> grow = [&]() {
        record();
        if (static_cast<int>(current.size()) == max_sites) return;
        std::vector<std::int32_t> candidates;
        for (std::int32_t s : current)
            interior_neighbors(s, [&](std::int32_t nb) {
                if (!in_set[nb] && !banned[nb]) {
                    candidates.push_back(nb);
                    banned[nb] = 1;  // collect distinct candidates in deterministic order
                }
            });
        for (std::int32_t c : candidates) banned[c] = 0;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            const std::int32_t c = candidates[i];
            in_set[c] = 1;
            current.push_back(c);
            banned[c] = 1;
            grow();
            current.pop_back();
            in_set[c] = 0;
        }
        for (std::int32_t c : candidates) banned[c] = 0;
    };
    grow();

    std::sort(fam.records.begin(), fam.records.end(),
              [](const ConnectedSetRecord& a, const ConnectedSetRecord& b) {
                  if (a.sites.size() != b.sites.size()) return a.sites.size() < b.sites.size();
                  return a.sites < b.sites;
              });
    fam.event_holds = fam.worst_margin >= 0.0;
    return fam;
}

PeierlsReport peierls_zero_probability(const Lattice& lat, std::int32_t v,
                                       std::span<const IntField> samples) {
    if (!lat.is_interior(v)) throw std::invalid_argument("peierls: v must be interior");
    // D+(phi) is the component of v in {phi >= 1}, so it is nonempty iff phi(v) >= 1
    std::vector<double> zs, ps, ms;
    zs.reserve(samples.size());
    for (const auto& phi : samples) {
        zs.push_back(phi[v] == 0 ? 1.0 : 0.0);
        ps.push_back(phi[v] >= 1 ? 1.0 : 0.0);
        ms.push_back(phi[v] <= -1 ? 1.0 : 0.0);
    }
    PeierlsReport rep;
    const auto to_est = [](const BatchStats& b) {
        return McEstimate{b.mean, b.se, b.n_samples};
    };
    rep.zero_prob = to_est(batch_means(zs));
    rep.d_plus_prob = to_est(batch_means(ps));
    rep.d_minus_prob = to_est(batch_means(ms));
    rep.region_logic_ok =
        1.0 - rep.zero_prob.mean <= rep.d_plus_prob.mean + rep.d_minus_prob.mean + 1e-12;
    return rep;
}

PeierlsReport peierls_zero_probability_exact(const IVGibbsSpec& spec) {
    spec.validate();
    const Lattice& lat = *spec.lattice;
    const std::int32_t v = lat.interior_rank(lat.center());
    const auto er = edge_ranks(lat);
    std::vector<double> site_eta(static_cast<std::size_t>(lat.n_interior()));
    for (std::int32_t r = 0; r < lat.n_interior(); ++r)
        site_eta[r] = (*spec.eta)[lat.interior_sites()[r]];

    const auto energy = [&](std::span<const int> phi) {
        double elastic = 0.0, coupling = 0.0;
        for (const auto& e : er) {
            const double g = (e.b >= 0 ? phi[e.b] : 0) - (e.a >= 0 ? phi[e.a] : 0);
            elastic += 0.5 * g * g;
        }
        for (std::size_t r = 0; r < site_eta.size(); ++r) coupling += site_eta[r] * phi[r];
        return elastic - spec.lambda * coupling;
    };

    double best = -1e308;
    for_each_config(lat, spec.band, {}, [&](std::span<const int> phi) {
        best = std::max(best, -spec.beta * energy(phi));
    });
    double s1 = 0.0, sz = 0.0, sp = 0.0, sm = 0.0;
    for_each_config(lat, spec.band, {}, [&](std::span<const int> phi) {
        const double w = std::exp(-spec.beta * energy(phi) - best);
        s1 += w;
        if (phi[v] == 0) sz += w;
        if (phi[v] >= 1) sp += w;
        if (phi[v] <= -1) sm += w;
    });
    PeierlsReport rep;
    rep.zero_prob = {sz / s1, 0.0, 0};
    rep.d_plus_prob = {sp / s1, 0.0, 0};
    rep.d_minus_prob = {sm / s1, 0.0, 0};
    rep.region_logic_ok =
        1.0 - rep.zero_prob.mean <= rep.d_plus_prob.mean + rep.d_minus_prob.mean + 1e-12;
    return rep;
}

IntField pyramid_test_function(const Lattice& lat, std::int32_t y) {
    const int L = lat.side();
    if (lat.linf_radius(y) > L / 2)
        throw std::invalid_argument("pyramid_test_function: y must lie in Lambda_{L/2}");
    const int prefactor =
        static_cast<int>(std::floor(std::pow(static_cast<double>(std::max(L, 1)),
                                             1.0 - lat.dim() / 2.0)));
    const int reach = L / 4;
    IntField p(lat, 0);
    const auto yc = lat.site(y);
    for (std::int32_t x = 0; x < lat.n_sites(); ++x) {
        const int dist = linf_distance(lat.site(x), yc);
        if (dist < reach) p[x] = prefactor * (reach - dist);
    }
    return p;
}

namespace {

double shift_margin_constant(const IVGibbsSpec& spec, const IntField& w) {
    const Lattice& lat = *spec.lattice;
    if (&w.lattice() != &lat) throw std::invalid_argument("shift inequality: w lattice mismatch");
    for (std::int32_t b : lat.boundary_sites())
        if (w[b] != 0) throw std::invalid_argument("shift inequality: w must vanish on boundary");
    double field = 0.0;
    for (std::int32_t x : lat.interior_sites()) field += (*spec.eta)[x] * w[x];
    return -2.0 * spec.lambda * field + grad_norm_sq(w);
}

}  // namespace

ShiftMargin check_shift_inequality(const IVGibbsSpec& spec, const EnumerationResult& exact,
                                   const IntField& w) {
    spec.validate();
    const Lattice& lat = *spec.lattice;
    if (exact.edge_grad_mean.size() != static_cast<std::size_t>(lat.n_edges()))
        throw std::invalid_argument("shift inequality: enumeration lacks edge gradient means");
    double cross = 0.0;
    for (std::int32_t e = 0; e < lat.n_edges(); ++e)
        cross += exact.edge_grad_mean[e] * grad(w, lat.edges()[e]);
    return {2.0 * cross + shift_margin_constant(spec, w), 0.0};
}

ShiftMargin check_shift_inequality(const IVGibbsSpec& spec, std::span<const IntField> samples,
                                   const IntField& w) {
    spec.validate();
    const Lattice& lat = *spec.lattice;
    const double constant = shift_margin_constant(spec, w);
    std::vector<double> margins;
    margins.reserve(samples.size());
    for (const auto& phi : samples) {
        double cross = 0.0;
        for (std::int32_t e = 0; e < lat.n_edges(); ++e)
            cross += static_cast<double>(grad(phi, lat.edges()[e])) * grad(w, lat.edges()[e]);
        margins.push_back(2.0 * cross + constant);
    }
    const auto b = batch_means(margins);
    return {b.mean, b.se};
}

}  // namespace rfs
