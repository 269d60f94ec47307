#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "ganimals/genome.hpp"
#include "ganimals/rng.hpp"
#include "ganimals/taxonomy.hpp"

namespace ganimals {

enum class Procedure { Recipe, Uniform, Stratified, Leaderboard };

std::string_view to_string(Procedure p) noexcept;
Procedure parse_procedure(std::string_view text);

enum class Characteristic { Cute, Creepy, Realistic, Memorable };

inline constexpr std::array<Characteristic, 4> kAllCharacteristics = {
    Characteristic::Cute, Characteristic::Creepy, Characteristic::Realistic,
    Characteristic::Memorable};

std::string_view to_string(Characteristic c) noexcept;
/// Throws UnknownMetric.
Characteristic parse_characteristic(std::string_view text);

struct PolicyMix {
    double p_recipe = 0.30;
    double p_uniform = 0.30;
    double p_stratified = 0.30;
    double p_leaderboard = 0.10;

    /// Throws InvalidMix unless every entry is in [0,1] and the sum is 1 within 1e-9.
    void validate() const;
};

inline constexpr std::size_t kDefaultLeaderboardK = 10;

using CategoryPair = std::pair<CategoryId, CategoryId>;

/// Ranked ganimal lists, best first, one per characteristic.
using Leaderboards = std::array<std::vector<GanimalId>, 4>;

Procedure choose_procedure(Rng& rng, const PolicyMix& mix);

CategoryPair sample_uniform_pair(Rng& rng, const Taxonomy& taxonomy);
/// Two distinct species uniformly, then one category uniformly within each.
/// Throws PreconditionViolation with fewer than two species.
CategoryPair sample_stratified_pair(Rng& rng, const Taxonomy& taxonomy);
/// Core pair by the taxonomy's pair weights, one category from each core,
/// category draws repeated on collision.
CategoryPair sample_recipe_pair(Rng& rng, const Taxonomy& taxonomy);

/// Rank r (1-based) among the top K = min(k, size) is drawn with weight K - r + 1.
/// Throws EmptyLeaderboard.
const GanimalId& sample_leaderboard(Rng& rng, std::span<const GanimalId> leaderboard,
                                    std::size_t k = kDefaultLeaderboardK);

struct DiscoveryResult {
    Procedure procedure = Procedure::Uniform;
    /// Set when exploitation was attempted (even if it fell back).
    std::optional<Characteristic> characteristic;
    std::variant<GanimalId, Genome> outcome;

    bool is_new() const noexcept { return std::holds_alternative<Genome>(outcome); }
};

struct DiscoveryOptions {
    PolicyMix mix;
    std::size_t leaderboard_k = kDefaultLeaderboardK;
    double truncation = kDefaultTruncation;
};

/// One draw of the discovery bandit against a single world's leaderboards.
/// Exploitation with an empty board falls back to uniform exploration, in
/// which case `procedure` reports Uniform.
DiscoveryResult next_discovery(Rng& rng, const Taxonomy& taxonomy,
                               const Leaderboards& world_leaderboards,
                               const DiscoveryOptions& options = {});

} // namespace ganimals
