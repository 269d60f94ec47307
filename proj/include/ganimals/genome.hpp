#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ganimals/hash.hpp"
#include "ganimals/taxonomy.hpp"

namespace ganimals {

enum class Generation { G0 = 0, G1 = 1, G2 = 2 };

std::string_view to_string(Generation g) noexcept;
Generation parse_generation(std::string_view text);

struct Component {
    CategoryId category = 0;
    double weight = 0.0;

    friend bool operator==(const Component&, const Component&) = default;
};

inline constexpr double kDefaultTruncation = 0.5;
inline constexpr double kWeightTolerance = 1e-12;
inline constexpr std::uint64_t kNoiseSalt = 0x47414E494D414C53ULL; // "GANIMALS"

/// A weighted category mixture plus the sampling knobs that make a render
/// reproducible. Components are kept sorted by category id.
class Genome {
public:
    /// Canonicalizes component order and validates every invariant
    /// (positive weights summing to 1, distinct ids, generation/arity match,
    /// truncation in (0, 1]). Throws ValidationError / TruncationOutOfRange.
    Genome(std::vector<Component> components, double truncation,
           std::uint64_t noise_seed, Generation generation);

    const std::vector<Component>& components() const noexcept { return components_; }
    double truncation() const noexcept { return truncation_; }
    std::uint64_t noise_seed() const noexcept { return noise_seed_; }
    Generation generation() const noexcept { return generation_; }

    bool has_category(CategoryId id) const noexcept;
    double weight_of(CategoryId id) const noexcept;

    friend bool operator==(const Genome&, const Genome&) = default;

private:
    std::vector<Component> components_;
    double truncation_ = kDefaultTruncation;
    std::uint64_t noise_seed_ = 0;
    Generation generation_ = Generation::G0;
};

/// Content identity of a ganimal: SHA-256 of canonical_serialization().
struct GanimalId {
    Digest256 digest;

    std::string hex() const { return digest.hex(); }
    static GanimalId from_hex(std::string_view hex) { return {Digest256::from_hex(hex)}; }

    friend auto operator<=>(const GanimalId&, const GanimalId&) = default;
};

/// Seed combination used when breeding: symmetric in its arguments.
std::uint64_t default_noise_rule(std::uint64_t seed_a, std::uint64_t seed_b) noexcept;
/// Arithmetic mean of the parents' truncations.
double default_truncation_rule(double a, double b) noexcept;

using NoiseRule = std::uint64_t (*)(std::uint64_t, std::uint64_t);
using TruncationRule = double (*)(double, double);

Genome make_g0(const Taxonomy& taxonomy, CategoryId category, double truncation,
               std::uint64_t noise_seed);

/// Direct G1 construction for exploration draws (midpoint of two categories).
Genome make_g1(const Taxonomy& taxonomy, CategoryId a, CategoryId b, double truncation,
               std::uint64_t noise_seed);

Genome breed_pair(const Genome& a, const Genome& b,
                  NoiseRule noise_rule = default_noise_rule,
                  TruncationRule truncation_rule = default_truncation_rule);

Genome breed_quad(const Genome& a, const Genome& b,
                  NoiseRule noise_rule = default_noise_rule,
                  TruncationRule truncation_rule = default_truncation_rule);

/// Shortest round-trip-safe rendering used everywhere a real value is
/// serialized for hashing or the wire: printf "%.17g".
std::string format_real(double value);

/// `v1|trunc=<t>|seed=<s>|<id>:<w>,...`, components sorted by id.
std::string canonical_serialization(const Genome& genome);
GanimalId canonical_id(const Genome& genome);

struct SpaceCounts {
    std::uint64_t g0 = 0;
    std::uint64_t g1 = 0;
    std::uint64_t g2 = 0;

    friend bool operator==(const SpaceCounts&, const SpaceCounts&) = default;
};

/// Possibility-space size for n categories: n, C(n,2), C(C(n,2),2).
/// Throws PreconditionViolation for n == 0 or when g2 overflows 64 bits.
SpaceCounts count_space(std::uint64_t n_categories);

} // namespace ganimals

template <>
struct std::hash<ganimals::GanimalId> {
    std::size_t operator()(const ganimals::GanimalId& id) const noexcept {
        return std::hash<ganimals::Digest256>{}(id.digest);
    }
};
