#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ganimals/genome.hpp"
#include "ganimals/rng.hpp"
#include "ganimals/sampler.hpp"
#include "ganimals/taxonomy.hpp"

namespace ganimals {

using WorldId = std::uint32_t;
using Tick = std::int64_t;

enum class LayoutVariant { FeedLinear, Spatial };

std::string_view to_string(LayoutVariant v) noexcept;
LayoutVariant parse_layout(std::string_view text);
/// Round-robin assignment across worlds at creation.
LayoutVariant layout_for_world(WorldId id) noexcept;

struct EnergyState {
    double energy = 0.0;
    Tick last_fed_tick = 0;

    friend bool operator==(const EnergyState&, const EnergyState&) = default;
};

struct EnergyConfig {
    double initial = 1.0;
    double decay = 0.1;
    double feed_amount = 0.25;

    void validate() const;
};

inline constexpr std::size_t kDefaultSeedSetSize = 100;

/// Energies at or below this are treated as exhausted. It absorbs the
/// rounding left over from repeated subtraction (e.g. ten decays of 0.1).
inline constexpr double kEnergyEpsilon = 1e-9;

/// Deterministic uniform hash of the user id onto [0, n_worlds).
WorldId assign_user(std::string_view user_id, std::uint32_t n_worlds);

/// One isolated ecology. Nothing in a World refers to another world's state;
/// the service owns one instance per world and serializes writes to it.
class World {
public:
    World(WorldId id, LayoutVariant layout);

    WorldId id() const noexcept { return id_; }
    LayoutVariant layout() const noexcept { return layout_; }
    Tick tick_count() const noexcept { return tick_; }
    const std::vector<GanimalId>& seed_set() const noexcept { return seed_set_; }
    const std::map<GanimalId, EnergyState>& population() const noexcept { return population_; }

    /// Records that the ganimal has been seen in this world (first sighting
    /// keeps its tick). Idempotent.
    void register_ganimal(const GanimalId& id);
    bool knows(const GanimalId& id) const noexcept { return first_seen_.contains(id); }
    std::optional<Tick> first_seen(const GanimalId& id) const;
    const std::map<GanimalId, Tick>& known() const noexcept { return first_seen_; }

    bool in_population(const GanimalId& id) const noexcept { return population_.contains(id); }
    bool was_removed(const GanimalId& id) const noexcept { return removed_.contains(id); }
    /// Known, never adopted, never removed.
    bool adoptable(const GanimalId& id) const noexcept;

    /// Inserts a known ganimal into the living population.
    /// Throws NotInWorld if unknown, PreconditionViolation if not adoptable.
    EnergyState adopt(const GanimalId& id, double initial_energy);
    void add_to_seed_set(const GanimalId& id, double initial_energy);

    /// Throws NotInWorld when the ganimal is not alive here.
    EnergyState feed(const GanimalId& id, double amount);

    /// Decays every member, drops the exhausted ones (returned in id order)
    /// and advances the tick.
    std::vector<GanimalId> tick(double decay);

    /// Full rebuild from per-ganimal mean ratings gathered in this world.
    /// Throws ValidationError if a rated ganimal is unknown here.
    const std::vector<GanimalId>& update_leaderboard(Characteristic c,
                                                     const std::map<GanimalId, double>& ratings);
    /// Incremental form used on each annotation write; same ordering rule.
    void set_rating(Characteristic c, const GanimalId& id, std::optional<double> mean);

    const Leaderboards& leaderboards() const noexcept { return boards_; }
    const std::vector<GanimalId>& leaderboard(Characteristic c) const noexcept {
        return boards_[static_cast<std::size_t>(c)];
    }
    std::optional<double> board_score(Characteristic c, const GanimalId& id) const;

    /// Population ordered for the Feed page: energy desc, then first seen,
    /// then id.
    std::vector<std::pair<GanimalId, EnergyState>> ranked_population() const;

    nlohmann::json to_json() const;
    static World from_json(const nlohmann::json& j);

    friend bool operator==(const World&, const World&) = default;

private:
    bool ranks_before(Characteristic c, const GanimalId& a, const GanimalId& b) const;

    WorldId id_;
    LayoutVariant layout_;
    Tick tick_ = 0;
    std::vector<GanimalId> seed_set_;
    std::map<GanimalId, EnergyState> population_;
    std::map<GanimalId, Tick> first_seen_;
    std::map<GanimalId, Tick> removed_;
    std::array<std::map<GanimalId, double>, 4> scores_;
    Leaderboards boards_;
};

struct CreatedWorld {
    World world;
    std::vector<Genome> seed_genomes;
};

/// Builds a world whose seed set is `n_seed` distinct exploration-only
/// discoveries (drawn against empty leaderboards).
CreatedWorld create_world(Rng& rng, const Taxonomy& taxonomy, WorldId id, LayoutVariant layout,
                          std::size_t n_seed = kDefaultSeedSetSize,
                          const EnergyConfig& energy = {},
                          const DiscoveryOptions& options = {});

} // namespace ganimals
