#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ganimals/catalogue.hpp"
#include "ganimals/config.hpp"
#include "ganimals/ecology.hpp"
#include "ganimals/events.hpp"
#include "ganimals/genome.hpp"
#include "ganimals/render.hpp"
#include "ganimals/sampler.hpp"
#include "ganimals/taxonomy.hpp"

namespace ganimals {

struct Ganimal {
    GanimalId id;
    Genome genome;
    ImageRef image;
    std::optional<std::string> name;
    std::vector<GanimalId> lineage; // empty or the two parents
    WorldId world_id = 0;           // world of creation
    Tick created_tick = 0;
    std::optional<std::string> creator;

    friend bool operator==(const Ganimal&, const Ganimal&) = default;
};

nlohmann::json genome_to_json(const Genome& genome);
Genome genome_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Ganimal& ganimal);
Ganimal ganimal_from_json(const nlohmann::json& j);
std::string permalink(const GanimalId& id);

struct UserState {
    WorldId world = 0;
    std::uint64_t discoveries = 0;

    friend bool operator==(const UserState&, const UserState&) = default;
};

/// Everything the event log reconstructs.
struct PlatformState {
    std::map<std::string, UserState> users;
    std::vector<World> worlds; // indexed by WorldId
    std::map<GanimalId, Ganimal> ganimals;
    AnnotationStore catalogue;

    nlohmann::json to_json() const;
    static PlatformState from_json(const nlohmann::json& j);
};

struct Discovery {
    Ganimal ganimal;
    WorldId world = 0;
    Procedure procedure = Procedure::Uniform;
    std::optional<Characteristic> characteristic;
    bool is_new = true;
};

/// Shannon entropy (bits) of the category-weight mass summed over a world's
/// living population.
double population_entropy(const World& world, const std::map<GanimalId, Ganimal>& ganimals);

/// The engine behind the HTTP API. Every mutation is appended to the event
/// log first and then applied; replaying the log from empty rebuilds the
/// same state. Writes are serialized; reads share a lock.
class Platform {
public:
    using Clock = std::function<std::int64_t()>;

    /// Opens (and replays) `<data_dir>/events.jsonl` when data_dir is set,
    /// then creates the configured worlds if the log has none.
    Platform(ServiceConfig config, Taxonomy taxonomy, GeneratorBackend& backend, Clock clock = {});

    Platform(const Platform&) = delete;
    Platform& operator=(const Platform&) = delete;

    /// Idempotent; appends UserAssigned on first contact.
    WorldId assign(const std::string& user);
    std::optional<WorldId> world_of(const std::string& user) const;

    Discovery discover(const std::string& user);
    Ganimal breed(const std::string& user, const GanimalId& parent_a, const GanimalId& parent_b,
                  std::optional<std::string> name = std::nullopt);
    Ganimal name_ganimal(const std::string& user, const GanimalId& id, const std::string& name);
    EnergyState feed(const std::string& user, const GanimalId& id);
    AnnotationAck annotate(const std::string& user, AnnotationRecord record);
    /// One Ticked event per world; returns the removed ids per world.
    std::vector<std::vector<GanimalId>> tick_all();

    /// Global (all worlds) comparison; predicate is contains_dog or contains_insect.
    GroupComparison stats(Metric metric, std::string_view predicate) const;

    Ganimal ganimal(const GanimalId& id) const;
    nlohmann::json world_view(const std::string& user);
    nlohmann::json leaderboard_view(const std::string& user, Characteristic c);

    void inspect(const std::function<void(const PlatformState&)>& reader) const;
    std::vector<Event> events() const;
    std::size_t event_count() const;
    nlohmann::json state_json() const;
    Digest256 state_hash() const;
    void write_snapshot();

    const Taxonomy& taxonomy() const noexcept { return taxonomy_; }
    const ServiceConfig& config() const noexcept { return config_; }
    ImageStore& images() noexcept { return *images_; }

private:
    WorldId ensure_user(const std::string& user);
    World& world_for(WorldId id);
    const Event& append(std::int64_t timestamp, EventKind kind, nlohmann::json payload);
    std::int64_t now();
    DiscoveryOptions discovery_options() const;
    void bootstrap_worlds();
    void after_append(const Event& event);

    void apply(const Event& event);
    void apply_user_assigned(const nlohmann::json& p);
    void apply_world_created(const nlohmann::json& p);
    void apply_discovered(const nlohmann::json& p);
    void apply_bred(const nlohmann::json& p);
    void apply_named(const nlohmann::json& p);
    EnergyState apply_fed(const nlohmann::json& p);
    AnnotationAck apply_annotated(const nlohmann::json& p);
    std::vector<GanimalId> apply_ticked(const nlohmann::json& p);
    void record_ganimal(const GanimalId& id, const Genome& genome, const ImageRef& image, WorldId world,
                       Tick tick, std::optional<std::string> creator, std::vector<GanimalId> lineage);

    ServiceConfig config_;
    Taxonomy taxonomy_;
    Clock clock_;
    std::unique_ptr<ImageStore> images_;
    std::unique_ptr<RenderCache> cache_;
    std::unique_ptr<EventLog> log_;
    PlatformState state_;
    mutable std::shared_mutex mu_;
};

} // namespace ganimals
