#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ganimals/config.hpp"
#include "ganimals/events.hpp"
#include "ganimals/hash.hpp"
#include "ganimals/taxonomy.hpp"

namespace ganimals {

/// Synthetic users: each carries a preference in [0, 1] for every taxonomy
/// flag and feeds or annotates a ganimal with probability equal to the
/// weight-averaged preference of its components.
enum class Flag { Dog, Insect, Bird, Aquatic, Megafauna, Other };
inline constexpr std::size_t kFlagCount = 6;

using Preference = std::array<double, kFlagCount>;

/// "uniform", "dog_lover" or "insect_lover"; throws ConfigError.
Preference profile_preference(std::string_view profile);
Flag category_flag(const Taxonomy& taxonomy, CategoryId id);

struct SimulationOptions {
    std::size_t n_users = 100;
    std::size_t n_steps = 200;
    std::uint64_t seed = 0;
    /// One profile per world, cycled when shorter than n_worlds. Empty means uniform.
    std::vector<std::string> world_profiles;
    std::uint32_t resolution = 16;
    double preference_jitter = 0.05;
    double breed_probability = 0.05;
    std::size_t feeds_per_step = 2;
    /// Planted shifts of the cute rating around the scale midpoint.
    double dog_cute_effect = 1.0;
    double insect_cute_effect = -1.0;
    /// Persist the run's log here when set (must not hold an earlier log).
    std::string data_dir;
};

struct SimulationResult {
    nlohmann::json report;
    std::vector<Event> events;
    Digest256 state_hash;
};

/// Runs on the mock backend with a logical clock, so the same config,
/// taxonomy and options always produce the same report bytes.
SimulationResult run_simulation(ServiceConfig config, const Taxonomy& taxonomy, const SimulationOptions& options);

} // namespace ganimals
