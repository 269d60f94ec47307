#include "ganimals/hash.hpp"

#include <openssl/sha.h>

#include "ganimals/error.hpp"

namespace ganimals {

std::string Digest256::hex() const {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (auto b : bytes) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0x0F]);
    }
    return out;
}

Digest256 Digest256::from_hex(std::string_view hex) {
    if (hex.size() != 64)
        fail(ErrorCode::ParseError, "digest must be 64 hex characters");
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    Digest256 d;
    for (std::size_t i = 0; i < 32; ++i) {
        int hi = nibble(hex[2 * i]);
        int lo = nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0)
            fail(ErrorCode::ParseError, "digest contains a non-hex character");
        d.bytes[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return d;
}

std::uint64_t Digest256::prefix_u64() const noexcept {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < 8; ++i)
        v = (v << 8) | bytes[i];
    return v;
}

Digest256 sha256(std::span<const std::uint8_t> data) {
    Digest256 d;
    SHA256(data.data(), data.size(), d.bytes.data());
    return d;
}

Digest256 sha256(std::string_view text) {
    return sha256(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

} // namespace ganimals

namespace ganimals {

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::string_view key, std::uint64_t n) {
    std::string text = std::to_string(master);
    text += '|';
    text += tag;
    text += '|';
    text += key;
    text += '|';
    text += std::to_string(n);
    return sha256(text).prefix_u64();
}

} // namespace ganimals
