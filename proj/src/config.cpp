#include "ganimals/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ganimals/error.hpp"

namespace ganimals {

using nlohmann::json;

void ServiceConfig::validate() const {
    if (n_worlds < 1)
        fail(ErrorCode::ConfigError, "n_worlds must be at least 1");
    try {
        policy_mix.validate();
    } catch (const Error& e) {
        fail(ErrorCode::ConfigError, std::string("policy_mix: ") + e.what());
    }
    if (leaderboard_k < 1)
        fail(ErrorCode::ConfigError, "leaderboard_k must be at least 1");
    energy.validate();
    if (tick_seconds < 1)
        fail(ErrorCode::ConfigError, "tick_seconds must be at least 1");
    if (backend.mode != "mock" && backend.mode != "http")
        fail(ErrorCode::ConfigError, "backend.mode must be 'mock' or 'http'");
    if (backend.mode == "http" && backend.url.empty())
        fail(ErrorCode::ConfigError, "backend.url is required in http mode");
    if (backend.retries < 1)
        fail(ErrorCode::ConfigError, "backend.retries must be at least 1");
    if (backend.timeout_ms < 1)
        fail(ErrorCode::ConfigError, "backend.timeout_ms must be positive");
    if (resolution < 1 || resolution > 4096)
        fail(ErrorCode::ConfigError, "resolution must lie in 1..4096");
    if (taxonomy_path.empty() != cores_path.empty())
        fail(ErrorCode::ConfigError, "taxonomy_path and cores_path must be set together");
    if (port < 0 || port > 65535)
        fail(ErrorCode::ConfigError, "port out of range");
}

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : j.items())
        if (!allowed.contains(key))
            fail(ErrorCode::ConfigError, "unknown config key '" + where + key + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key))
        out = j.at(key).get<T>();
}

} // namespace

ServiceConfig config_from_json(const json& j) {
    if (!j.is_object())
        fail(ErrorCode::ConfigError, "config must be a JSON object");
    ServiceConfig c;
    try {
        reject_unknown(j,
                       {"n_worlds", "policy_mix", "leaderboard_k", "energy", "tick_seconds",
                        "seed_set_size", "backend", "resolution", "data_dir", "master_seed",
                        "taxonomy_path", "cores_path", "snapshot_every", "listen"},
                       "");
        read(j, "n_worlds", c.n_worlds);
        if (j.contains("policy_mix")) {
            const auto& m = j.at("policy_mix");
            reject_unknown(m, {"recipe", "uniform", "stratified", "leaderboard"}, "policy_mix.");
            read(m, "recipe", c.policy_mix.p_recipe);
            read(m, "uniform", c.policy_mix.p_uniform);
            read(m, "stratified", c.policy_mix.p_stratified);
            read(m, "leaderboard", c.policy_mix.p_leaderboard);
        }
        read(j, "leaderboard_k", c.leaderboard_k);
        if (j.contains("energy")) {
            const auto& e = j.at("energy");
            reject_unknown(e, {"initial", "decay", "feed_amount"}, "energy.");
            read(e, "initial", c.energy.initial);
            read(e, "decay", c.energy.decay);
            read(e, "feed_amount", c.energy.feed_amount);
        }
        read(j, "tick_seconds", c.tick_seconds);
        read(j, "seed_set_size", c.seed_set_size);
        if (j.contains("backend")) {
            const auto& b = j.at("backend");
            reject_unknown(b, {"mode", "url", "retries", "timeout_ms"}, "backend.");
            read(b, "mode", c.backend.mode);
            read(b, "url", c.backend.url);
            read(b, "retries", c.backend.retries);
            read(b, "timeout_ms", c.backend.timeout_ms);
        }
        read(j, "resolution", c.resolution);
        read(j, "data_dir", c.data_dir);
        read(j, "master_seed", c.master_seed);
        read(j, "taxonomy_path", c.taxonomy_path);
        read(j, "cores_path", c.cores_path);
        read(j, "snapshot_every", c.snapshot_every);
        if (j.contains("listen")) {
            const auto& l = j.at("listen");
            reject_unknown(l, {"host", "port"}, "listen.");
            read(l, "host", c.host);
            read(l, "port", c.port);
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::ConfigError, std::string("bad config value: ") + e.what());
    }
    c.validate();
    return c;
}

json to_json(const ServiceConfig& c) {
    return json{
        {"n_worlds", c.n_worlds},
        {"policy_mix",
         {{"recipe", c.policy_mix.p_recipe},
          {"uniform", c.policy_mix.p_uniform},
          {"stratified", c.policy_mix.p_stratified},
          {"leaderboard", c.policy_mix.p_leaderboard}}},
        {"leaderboard_k", c.leaderboard_k},
        {"energy",
         {{"initial", c.energy.initial}, {"decay", c.energy.decay}, {"feed_amount", c.energy.feed_amount}}},
        {"tick_seconds", c.tick_seconds},
        {"seed_set_size", c.seed_set_size},
        {"backend",
         {{"mode", c.backend.mode},
          {"url", c.backend.url},
          {"retries", c.backend.retries},
          {"timeout_ms", c.backend.timeout_ms}}},
        {"resolution", c.resolution},
        {"data_dir", c.data_dir},
        {"master_seed", c.master_seed},
        {"taxonomy_path", c.taxonomy_path},
        {"cores_path", c.cores_path},
        {"snapshot_every", c.snapshot_every},
        {"listen", {{"host", c.host}, {"port", c.port}}},
    };
}

ServiceConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        fail(ErrorCode::ConfigError, "cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::ConfigError, "config " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

namespace {

template <typename T>
T parse_number(const std::string& name, const std::string& text) {
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
        fail(ErrorCode::ConfigError, name + ": cannot parse '" + text + "'");
    return value;
}

double parse_real(const std::string& name, const std::string& text) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || *end != '\0')
        fail(ErrorCode::ConfigError, name + ": cannot parse '" + text + "'");
    return v;
}

} // namespace

void apply_env_overrides(ServiceConfig& c, const EnvLookup& lookup) {
    auto with = [&](const char* name, auto&& apply) {
        if (auto v = lookup(name))
            apply(std::string(name), *v);
    };
    with("GANIMALS_N_WORLDS", [&](auto n, auto v) { c.n_worlds = parse_number<std::uint32_t>(n, v); });
    with("GANIMALS_MASTER_SEED", [&](auto n, auto v) { c.master_seed = parse_number<std::uint64_t>(n, v); });
    with("GANIMALS_DATA_DIR", [&](auto, auto v) { c.data_dir = v; });
    with("GANIMALS_BACKEND_MODE", [&](auto, auto v) { c.backend.mode = v; });
    with("GANIMALS_BACKEND_URL", [&](auto, auto v) { c.backend.url = v; });
    with("GANIMALS_BACKEND_RETRIES", [&](auto n, auto v) { c.backend.retries = parse_number<int>(n, v); });
    with("GANIMALS_LEADERBOARD_K", [&](auto n, auto v) { c.leaderboard_k = parse_number<std::size_t>(n, v); });
    with("GANIMALS_RESOLUTION", [&](auto n, auto v) { c.resolution = parse_number<std::uint32_t>(n, v); });
    with("GANIMALS_TICK_SECONDS", [&](auto n, auto v) { c.tick_seconds = parse_number<std::int64_t>(n, v); });
    with("GANIMALS_SEED_SET_SIZE", [&](auto n, auto v) { c.seed_set_size = parse_number<std::size_t>(n, v); });
    with("GANIMALS_SNAPSHOT_EVERY", [&](auto n, auto v) { c.snapshot_every = parse_number<std::size_t>(n, v); });
    with("GANIMALS_HOST", [&](auto, auto v) { c.host = v; });
    with("GANIMALS_PORT", [&](auto n, auto v) { c.port = parse_number<int>(n, v); });
    with("GANIMALS_TAXONOMY", [&](auto, auto v) { c.taxonomy_path = v; });
    with("GANIMALS_CORES", [&](auto, auto v) { c.cores_path = v; });
    with("GANIMALS_ENERGY_INITIAL", [&](auto n, auto v) { c.energy.initial = parse_real(n, v); });
    with("GANIMALS_ENERGY_DECAY", [&](auto n, auto v) { c.energy.decay = parse_real(n, v); });
    with("GANIMALS_ENERGY_FEED", [&](auto n, auto v) { c.energy.feed_amount = parse_real(n, v); });
    with("GANIMALS_POLICY_MIX", [&](auto n, auto v) {
        std::array<double, 4> p{};
        std::istringstream in(v);
        std::string part;
        std::size_t i = 0;
        while (std::getline(in, part, ',')) {
            if (i == 4)
                fail(ErrorCode::ConfigError, n + ": expected four comma-separated values");
            p[i++] = parse_real(n, part);
        }
        if (i != 4)
            fail(ErrorCode::ConfigError, n + ": expected four comma-separated values");
        c.policy_mix = {p[0], p[1], p[2], p[3]};
    });
    c.validate();
}

EnvLookup process_env() {
    return [](const std::string& name) -> std::optional<std::string> {
        if (const char* v = std::getenv(name.c_str()))
            return std::string(v);
        return std::nullopt;
    };
}

Taxonomy load_taxonomy_for(const ServiceConfig& config) {
    if (config.taxonomy_path.empty())
        return load_default_taxonomy();
    return load_taxonomy(config.taxonomy_path, config.cores_path);
}

} // namespace ganimals
