#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "ganimals/ecology.hpp"
#include "ganimals/render.hpp"
#include "ganimals/sampler.hpp"
#include "ganimals/taxonomy.hpp"

namespace ganimals {

struct BackendConfig {
    std::string mode = "mock"; // "mock" or "http"
    std::string url;
    int retries = 3;
    int timeout_ms = 30000;
};

struct ServiceConfig {
    std::uint32_t n_worlds = 4;
    PolicyMix policy_mix;
    std::size_t leaderboard_k = kDefaultLeaderboardK;
    EnergyConfig energy;
    std::int64_t tick_seconds = 3600;
    std::size_t seed_set_size = kDefaultSeedSetSize;
    BackendConfig backend;
    std::uint32_t resolution = kDefaultResolution;
    std::string data_dir; // empty keeps everything in memory
    std::uint64_t master_seed = 0;
    std::string taxonomy_path; // empty selects the bundled files
    std::string cores_path;
    std::size_t snapshot_every = 10000; // 0 disables snapshots
    std::string host = "127.0.0.1";
    int port = 8080;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Every key is optional; unknown keys are rejected so typos surface early.
ServiceConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ServiceConfig& config);
ServiceConfig load_config(const std::filesystem::path& path);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Applies GANIMALS_* environment overrides:
///   GANIMALS_N_WORLDS, GANIMALS_MASTER_SEED, GANIMALS_DATA_DIR,
///   GANIMALS_BACKEND_MODE, GANIMALS_BACKEND_URL, GANIMALS_BACKEND_RETRIES,
///   GANIMALS_LEADERBOARD_K, GANIMALS_RESOLUTION, GANIMALS_TICK_SECONDS,
///   GANIMALS_SEED_SET_SIZE, GANIMALS_SNAPSHOT_EVERY, GANIMALS_HOST,
///   GANIMALS_PORT, GANIMALS_TAXONOMY, GANIMALS_CORES,
///   GANIMALS_ENERGY_INITIAL, GANIMALS_ENERGY_DECAY, GANIMALS_ENERGY_FEED,
///   GANIMALS_POLICY_MIX ("recipe,uniform,stratified,leaderboard").
void apply_env_overrides(ServiceConfig& config, const EnvLookup& lookup);
EnvLookup process_env();

Taxonomy load_taxonomy_for(const ServiceConfig& config);

} // namespace ganimals
