#pragma once

#include <array>
#include <cstdint>

namespace ganimals {

/// Xoshiro256** seeded through SplitMix64.
///
/// The generator and every derived draw below are implemented here instead of
/// going through <random> distributions, whose output is implementation
/// defined. A seed therefore pins the draw sequence across compilers and
/// platforms, which replay and golden tests rely on.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) noexcept;

    std::uint64_t next_u64() noexcept;

    /// Uniform double in [0, 1) built from the top 53 bits of one draw.
    double uniform01() noexcept;

    /// Uniform integer in [0, bound). Lemire's multiply-shift with rejection,
    /// so the result is exactly uniform. bound must be > 0.
    std::uint64_t below(std::uint64_t bound) noexcept;

    /// Standard normal via Box-Muller (consumes two draws, no caching).
    double normal() noexcept;

    const std::array<std::uint64_t, 4>& state() const noexcept { return s_; }

private:
    std::array<std::uint64_t, 4> s_{};
};

} // namespace ganimals
