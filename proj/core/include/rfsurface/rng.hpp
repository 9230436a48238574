#pragma once

#include <cstdint>

namespace rfs {

/** splitmix64 finalizer; the mixing primitive behind all streams. */
std::uint64_t mix64(std::uint64_t z);

/** Stream purposes keep draws for different uses statistically disjoint. */
enum class Purpose : std::uint32_t {
    Generic = 0,
    Disorder = 1,
    Resample = 2,
    LangevinNoise = 3,
    Metropolis = 4,
    GffMode = 5,
    Environment = 6,
};

struct SeedSpec {
    std::uint64_t base_seed = 0;
    std::uint64_t realization = 0;
    Purpose purpose = Purpose::Generic;

    SeedSpec with(Purpose p) const { return {base_seed, realization, p}; }
    SeedSpec with_realization(std::uint64_t r) const { return {base_seed, r, purpose}; }
};

/**
 * Counter-based generator: the draw sequence is a pure function of
 * (base_seed, realization, purpose, stream). Independent streams never
 * share state, so per-site and per-realization work parallelizes and
 * replays exactly.
 */
class CounterRng {
  public:
    CounterRng(const SeedSpec& spec, std::uint64_t stream);

    std::uint64_t next_u64();
    double next_uniform();   // [0,1)
    double next_gaussian();  // standard normal, Box-Muller
    int next_sign();         // +1 or -1
    /** next integer in [0, n) by rejection-free scaling (n small) */
    std::uint64_t next_below(std::uint64_t n);

  private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace rfs
