#pragma once

#include <cmath>
#include <cstdint>

namespace fracevo {

// Counter-based Gaussian stream. Every draw is a pure function of
// (seed, stream tag, replicate, mode, counter), so ensembles are
// bit-reproducible for any worker count or evaluation order.
namespace rng_detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t absorb(std::uint64_t state, std::uint64_t v) {
    return splitmix64(state ^ (v + 0x9e3779b97f4a7c15ULL));
}

// Uniform in (0, 1): top 53 bits, offset half an ulp away from 0 and 1.
inline double to_unit(std::uint64_t h) {
    return (static_cast<double>(h >> 11) + 0.5) * 0x1p-53;
}

}  // namespace rng_detail

class CounterRng {
public:
    // `domain` separates independent usages (noise panels, stationary draws,
    // Monte Carlo transition solves, ...) that share a user seed.
    CounterRng(std::uint64_t seed, std::uint64_t domain, std::uint64_t replicate,
               std::uint64_t mode) {
        using rng_detail::absorb;
        key_ = absorb(absorb(absorb(absorb(0x6a09e667f3bcc908ULL, seed), domain), replicate),
                      mode);
    }

    // Standard normal indexed by a counter (Box-Muller on two hashed uniforms).
    double normal(std::uint64_t counter) const {
        using namespace rng_detail;
        const double u1 = to_unit(splitmix64(key_ ^ (2 * counter)));
        const double u2 = to_unit(splitmix64(key_ ^ (2 * counter + 1) ^ 0xd2b74407b1ce6e93ULL));
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double uniform(std::uint64_t counter) const {
        using namespace rng_detail;
        return to_unit(splitmix64(key_ ^ counter ^ 0xa0761d6478bd642fULL));
    }

private:
    std::uint64_t key_;
};

// Stream domains used across the library.
enum class RngDomain : std::uint64_t {
    noise_panel = 1,
    stationary = 2,
    fqw = 3,
    transition = 4,
    test = 99,
};

}  // namespace fracevo
