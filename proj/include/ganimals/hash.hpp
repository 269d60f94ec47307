#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace ganimals {

/// 256-bit SHA-256 digest. Ordering is lexicographic over the raw bytes.
struct Digest256 {
    std::array<std::uint8_t, 32> bytes{};

    std::string hex() const;
    static Digest256 from_hex(std::string_view hex);

    /// First eight bytes read big-endian.
    std::uint64_t prefix_u64() const noexcept;

    friend auto operator<=>(const Digest256&, const Digest256&) = default;
};

Digest256 sha256(std::span<const std::uint8_t> data);
Digest256 sha256(std::string_view text);

// SplitMix64 finalizer; also the seeding function for Xoshiro256.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

} // namespace ganimals

template <>
struct std::hash<ganimals::Digest256> {
    std::size_t operator()(const ganimals::Digest256& d) const noexcept {
        return static_cast<std::size_t>(d.prefix_u64());
    }
};

namespace ganimals {

/// Independent 64-bit stream seed for (tag, key, n) under a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::string_view key,
                          std::uint64_t n = 0);

} // namespace ganimals
