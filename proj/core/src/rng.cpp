#include "rfsurface/rng.hpp"

#include <cmath>
#include <numbers>

namespace rfs {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

CounterRng::CounterRng(const SeedSpec& spec, std::uint64_t stream) {
    std::uint64_t h = mix64(spec.base_seed + kGolden);
    h = mix64(h ^ (spec.realization * 0xC2B2AE3D27D4EB4FULL + 0x165667B19E3779F9ULL));
    h = mix64(h ^ (static_cast<std::uint64_t>(spec.purpose) * 0xD6E8FEB86659FD93ULL + 1ULL));
    h = mix64(h ^ (stream * 0xA24BAED4963EE407ULL + 0x9FB21C651E98DF25ULL));
    state_ = h;
}

std::uint64_t CounterRng::next_u64() {
    state_ += kGolden;
    return mix64(state_);
}

double CounterRng::next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::next_gaussian() {
    if (have_cached_) {
        have_cached_ = false;
        return cached_;
    }
    // u1 in (0,1] so the log is finite.
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
}

int CounterRng::next_sign() {
    return (next_u64() >> 63) ? 1 : -1;
}

std::uint64_t CounterRng::next_below(std::uint64_t n) {
    // 128-bit multiply keeps the modulo bias at ~n/2^64, negligible here.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

}  // namespace rfs
