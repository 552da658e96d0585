#pragma once

// Counter-based pseudo-random streams for reproducible parallel simulation.
//
// Each (seed, stream) pair keys an independent SplitMix64 sequence: the j-th
// output is mix64(key + j * GAMMA) with the standard SplitMix64 finalizer, so
// any draw is a pure function of (seed, stream, j). Replications map to
// streams, which makes results independent of the number of worker threads
// and of scheduling order. Normal variates come from the inversion method
// applied to 53-bit uniforms, giving bit-identical output across platforms.

#include <cstdint>

#include "curveq/stats.hpp"

namespace curveq {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace detail

class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : key_(detail::mix64(detail::mix64(seed + detail::kGolden) ^
                             detail::mix64(stream * detail::kGolden + detail::kGolden))) {}

    std::uint64_t next_u64() {
        counter_ += detail::kGolden;
        return detail::mix64(key_ + counter_);
    }

    // Uniform on the open interval (0,1); never returns 0 or 1, so the
    // normal inversion below is always finite.
    double next_uniform() {
        const std::uint64_t bits = next_u64() >> 11;  // top 53 bits
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    // Standard normal by inversion.
    double next_normal() { return normal_quantile(next_uniform()); }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace curveq
