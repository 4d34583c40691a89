// SPDX-License-Identifier: Apache-2.0
//
// Reproducible random streams.  One mt19937_64 engine per (seed, stream)
// pair, derived through splitmix64, with an explicit uint64 -> double
// conversion and Box-Muller Gaussians.  The C++ standard fully specifies
// mt19937_64 output, so draws are bit-identical across platforms and
// independent of how work is split over threads.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace speccoh {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

/// Gaussian stream for one (seed, stream-id) pair.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream)
        : engine_(detail::splitmix64(detail::splitmix64(seed) ^ stream)) {}

    /// Uniform in (0, 1): top 53 bits of the draw, offset off zero.
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53;
    }

    /// Standard normal via Box-Muller; draws are consumed in pairs.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace speccoh
