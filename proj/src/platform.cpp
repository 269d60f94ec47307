#include "ganimals/platform.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>

#include "ganimals/error.hpp"

namespace ganimals {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxNameLength = 64;

json optional_string(const std::optional<std::string>& s) {
    return s ? json(*s) : json(nullptr);
}

std::optional<std::string> read_optional_string(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null())
        return std::nullopt;
    return j.at(key).get<std::string>();
}

void check_name(const std::string& name) {
    if (name.empty() || name.size() > kMaxNameLength)
        fail(ErrorCode::BadRequest, "names must be 1 to 64 bytes long");
    for (unsigned char ch : name)
        if (ch < 0x20 || ch == 0x7F)
            fail(ErrorCode::BadRequest, "names may not contain control characters");
}

} // namespace

json genome_to_json(const Genome& g) {
    json comps = json::array();
    for (const auto& c : g.components())
        comps.push_back(json::array({c.category, c.weight}));
    return json{{"components", comps},
                {"truncation", g.truncation()},
                {"noise_seed", g.noise_seed()},
                {"generation", to_string(g.generation())}};
}

Genome genome_from_json(const json& j) {
    std::vector<Component> comps;
    for (const auto& c : j.at("components"))
        comps.push_back({c.at(0).get<CategoryId>(), c.at(1).get<double>()});
    return Genome(std::move(comps), j.at("truncation").get<double>(), j.at("noise_seed").get<std::uint64_t>(),
                  parse_generation(j.at("generation").get<std::string>()));
}

std::string permalink(const GanimalId& id) {
    return "/g/" + id.hex();
}

json to_json(const Ganimal& g) {
    json lineage = json::array();
    for (const auto& p : g.lineage)
        lineage.push_back(p.hex());
    return json{{"id", g.id.hex()},
                {"permalink", permalink(g.id)},
                {"genome", genome_to_json(g.genome)},
                {"generation", to_string(g.genome.generation())},
                {"image", to_json(g.image)},
                {"name", optional_string(g.name)},
                {"lineage", lineage},
                {"world_id", g.world_id},
                {"created_tick", g.created_tick},
                {"creator", optional_string(g.creator)}};
}

Ganimal ganimal_from_json(const json& j) {
    Ganimal g{GanimalId::from_hex(j.at("id").get<std::string>()),
              genome_from_json(j.at("genome")),
              image_ref_from_json(j.at("image")),
              read_optional_string(j, "name"),
              {},
              j.at("world_id").get<WorldId>(),
              j.at("created_tick").get<Tick>(),
              read_optional_string(j, "creator")};
    for (const auto& p : j.at("lineage"))
        g.lineage.push_back(GanimalId::from_hex(p.get<std::string>()));
    return g;
}

json PlatformState::to_json() const {
    json j;
    json u = json::object();
    for (const auto& [user, s] : users)
        u[user] = {{"world", s.world}, {"discoveries", s.discoveries}};
    j["users"] = u;
    json w = json::array();
    for (const auto& world : worlds)
        w.push_back(world.to_json());
    j["worlds"] = w;
    json g = json::object();
    for (const auto& [id, ganimal] : ganimals)
        g[id.hex()] = ganimals::to_json(ganimal);
    j["ganimals"] = g;
    j["catalogue"] = catalogue.to_json();
    return j;
}

PlatformState PlatformState::from_json(const json& j) {
    PlatformState s;
    for (const auto& [user, v] : j.at("users").items())
        s.users[user] = {v.at("world").get<WorldId>(), v.at("discoveries").get<std::uint64_t>()};
    for (const auto& w : j.at("worlds"))
        s.worlds.push_back(World::from_json(w));
    for (const auto& [id, g] : j.at("ganimals").items())
        s.ganimals.emplace(GanimalId::from_hex(id), ganimal_from_json(g));
    s.catalogue = AnnotationStore::from_json(j.at("catalogue"));
    return s;
}

double population_entropy(const World& world, const std::map<GanimalId, Ganimal>& ganimals) {
    std::map<CategoryId, double> mass;
    double total = 0.0;
    for (const auto& [id, energy] : world.population()) {
        for (const auto& c : ganimals.at(id).genome.components()) {
            mass[c.category] += c.weight;
            total += c.weight;
        }
    }
    double h = 0.0;
    for (const auto& [cat, m] : mass) {
        const double p = m / total;
        h -= p * std::log2(p);
    }
    return h;
}

Platform::Platform(ServiceConfig config, Taxonomy taxonomy, GeneratorBackend& backend, Clock clock)
    : config_(std::move(config)), taxonomy_(std::move(taxonomy)), clock_(std::move(clock)) {
    config_.validate();
    if (!clock_)
        clock_ = [] {
            return std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                .count();
        };

    std::uint64_t replay_from = 0;
    if (config_.data_dir.empty()) {
        images_ = std::make_unique<ImageStore>();
        log_ = std::make_unique<EventLog>();
    } else {
        const std::filesystem::path dir = config_.data_dir;
        images_ = std::make_unique<ImageStore>(dir / "images");
        log_ = std::make_unique<EventLog>(dir / "events.jsonl");
        const auto snap = dir / "snapshot.json";
        if (std::filesystem::exists(snap)) {
            std::ifstream in(snap);
            const json doc = json::parse(in);
            const auto seq = doc.at("sequence_no").get<std::uint64_t>();
            // A snapshot ahead of the log (log lost its tail) is unusable.
            if (seq <= log_->last_sequence()) {
                state_ = PlatformState::from_json(doc.at("state"));
                replay_from = seq;
            }
        }
    }
    cache_ = std::make_unique<RenderCache>(backend, *images_, config_.resolution,
                                           RetryPolicy{config_.backend.retries, std::chrono::milliseconds(0)});
    for (const auto& [id, g] : state_.ganimals)
        cache_->remember(id, g.image);
    for (const auto& event : log_->events())
        if (event.sequence_no > replay_from)
            apply(event);

    if (state_.worlds.empty())
        bootstrap_worlds();
    else if (state_.worlds.size() != config_.n_worlds)
        fail(ErrorCode::ConfigError, "event log holds " + std::to_string(state_.worlds.size()) +
                                         " worlds but config asks for " + std::to_string(config_.n_worlds));
}

DiscoveryOptions Platform::discovery_options() const {
    return {config_.policy_mix, config_.leaderboard_k, kDefaultTruncation};
}

std::int64_t Platform::now() {
    return clock_();
}

void Platform::bootstrap_worlds() {
    for (WorldId w = 0; w < config_.n_worlds; ++w) {
        Rng rng(derive_seed(config_.master_seed, "world", std::to_string(w)));
        auto created = create_world(rng, taxonomy_, w, layout_for_world(w), config_.seed_set_size,
                                    config_.energy, discovery_options());
        json seeds = json::array();
        for (const auto& genome : created.seed_genomes) {
            const auto image = cache_->render_cached(genome);
            seeds.push_back({{"genome", genome_to_json(genome)}, {"image", to_json(image)}});
        }
        const auto& event = append(now(), EventKind::WorldCreated,
                                   {{"world_id", w},
                                    {"layout_variant", to_string(created.world.layout())},
                                    {"initial_energy", config_.energy.initial},
                                    {"seed_set", seeds}});
        apply(event);
        after_append(event);
    }
}

const Event& Platform::append(std::int64_t timestamp, EventKind kind, json payload) {
    return log_->append(timestamp, kind, std::move(payload));
}

void Platform::after_append(const Event& event) {
    if (config_.snapshot_every > 0 && !config_.data_dir.empty() &&
        event.sequence_no % config_.snapshot_every == 0)
        write_snapshot();
}

World& Platform::world_for(WorldId id) {
    if (id >= state_.worlds.size())
        fail(ErrorCode::ValidationError, "no world " + std::to_string(id));
    return state_.worlds[id];
}

WorldId Platform::ensure_user(const std::string& user) {
    if (user.empty())
        fail(ErrorCode::BadRequest, "user id is required");
    if (auto it = state_.users.find(user); it != state_.users.end())
        return it->second.world;
    const WorldId w = assign_user(user, config_.n_worlds);
    const auto& event = append(now(), EventKind::UserAssigned, {{"user", user}, {"world", w}});
    apply_user_assigned(event.payload);
    after_append(event);
    return w;
}

WorldId Platform::assign(const std::string& user) {
    std::unique_lock lock(mu_);
    return ensure_user(user);
}

std::optional<WorldId> Platform::world_of(const std::string& user) const {
    std::shared_lock lock(mu_);
    if (auto it = state_.users.find(user); it != state_.users.end())
        return it->second.world;
    return std::nullopt;
}

Discovery Platform::discover(const std::string& user) {
    std::unique_lock lock(mu_);
    const WorldId w = ensure_user(user);
    const World& world = world_for(w);
    const auto& us = state_.users.at(user);
    Rng rng(derive_seed(config_.master_seed, "discover", user, us.discoveries));
    auto result = next_discovery(rng, taxonomy_, world.leaderboards(), discovery_options());

    json payload{{"user", user},
                 {"world", w},
                 {"procedure", to_string(result.procedure)},
                 {"characteristic", result.characteristic ? json(to_string(*result.characteristic)) : json(nullptr)},
                 {"is_new", result.is_new()}};
    GanimalId id;
    if (result.is_new()) {
        const auto& genome = std::get<Genome>(result.outcome);
        id = canonical_id(genome);
        auto known = state_.ganimals.find(id);
        const ImageRef image = known != state_.ganimals.end() ? known->second.image : cache_->render_cached(genome);
        payload["genome"] = genome_to_json(genome);
        payload["image"] = to_json(image);
    } else {
        id = std::get<GanimalId>(result.outcome);
    }
    payload["ganimal_id"] = id.hex();
    const auto& event = append(now(), EventKind::GanimalDiscovered, std::move(payload));
    apply_discovered(event.payload);
    after_append(event);
    return {state_.ganimals.at(id), w, result.procedure, result.characteristic, result.is_new()};
}

Ganimal Platform::breed(const std::string& user, const GanimalId& parent_a, const GanimalId& parent_b,
                        std::optional<std::string> name) {
    std::unique_lock lock(mu_);
    const WorldId w = ensure_user(user);
    const World& world = world_for(w);
    auto a = state_.ganimals.find(parent_a);
    auto b = state_.ganimals.find(parent_b);
    if (a == state_.ganimals.end())
        fail(ErrorCode::UnknownGanimal, "unknown parent " + parent_a.hex());
    if (b == state_.ganimals.end())
        fail(ErrorCode::UnknownGanimal, "unknown parent " + parent_b.hex());
    if (!world.knows(parent_a) || !world.knows(parent_b))
        fail(ErrorCode::CrossWorld, "both parents must come from world " + std::to_string(w));
    if (name)
        check_name(*name);

    const Genome genome = breed_quad(a->second.genome, b->second.genome);
    const GanimalId id = canonical_id(genome);
    auto known = state_.ganimals.find(id);
    if (name && known != state_.ganimals.end() && known->second.name)
        fail(ErrorCode::AlreadyNamed, "ganimal " + id.hex() + " already has a name");
    const ImageRef image = known != state_.ganimals.end() ? known->second.image : cache_->render_cached(genome);

    const auto& bred = append(now(), EventKind::GanimalBred,
                              {{"user", user},
                               {"world", w},
                               {"parents", json::array({parent_a.hex(), parent_b.hex()})},
                               {"ganimal_id", id.hex()},
                               {"genome", genome_to_json(genome)},
                               {"image", to_json(image)}});
    apply_bred(bred.payload);
    after_append(bred);
    if (name) {
        const auto& named = append(now(), EventKind::Named, {{"user", user}, {"ganimal_id", id.hex()}, {"name", *name}});
        apply_named(named.payload);
        after_append(named);
    }
    return state_.ganimals.at(id);
}

Ganimal Platform::name_ganimal(const std::string& user, const GanimalId& id, const std::string& name) {
    std::unique_lock lock(mu_);
    const WorldId w = ensure_user(user);
    auto it = state_.ganimals.find(id);
    if (it == state_.ganimals.end())
        fail(ErrorCode::UnknownGanimal, "unknown ganimal " + id.hex());
    if (!world_for(w).knows(id))
        fail(ErrorCode::CrossWorld, "ganimal " + id.hex() + " is not part of world " + std::to_string(w));
    check_name(name);
    if (it->second.name)
        fail(ErrorCode::AlreadyNamed, "ganimal " + id.hex() + " already has a name");
    const auto& event = append(now(), EventKind::Named, {{"user", user}, {"ganimal_id", id.hex()}, {"name", name}});
    apply_named(event.payload);
    after_append(event);
    return it->second;
}

EnergyState Platform::feed(const std::string& user, const GanimalId& id) {
    std::unique_lock lock(mu_);
    const WorldId w = ensure_user(user);
    if (!state_.ganimals.contains(id))
        fail(ErrorCode::UnknownGanimal, "unknown ganimal " + id.hex());
    const World& world = world_for(w);
    bool adopt = false;
    if (!world.in_population(id)) {
        if (!world.adoptable(id))
            fail(ErrorCode::NotInWorld, "ganimal " + id.hex() + " is not alive in world " + std::to_string(w));
        adopt = true;
    }
    json payload{{"user", user},
                 {"world", w},
                 {"ganimal_id", id.hex()},
                 {"amount", config_.energy.feed_amount},
                 {"adopted", adopt}};
    if (adopt)
        payload["initial_energy"] = config_.energy.initial;
    const auto& event = append(now(), EventKind::Fed, std::move(payload));
    auto energy = apply_fed(event.payload);
    after_append(event);
    return energy;
}

AnnotationAck Platform::annotate(const std::string& user, AnnotationRecord record) {
    std::unique_lock lock(mu_);
    const WorldId w = ensure_user(user);
    if (!state_.ganimals.contains(record.ganimal_id))
        fail(ErrorCode::UnknownGanimal, "unknown ganimal " + record.ganimal_id.hex());
    if (!world_for(w).knows(record.ganimal_id))
        fail(ErrorCode::CrossWorld,
             "ganimal " + record.ganimal_id.hex() + " is not part of world " + std::to_string(w));
    const auto ts = now();
    record.user_id = user;
    record.world_id = w;
    record.timestamp = ts;
    AnnotationStore::validate(record);
    const auto& event = append(ts, EventKind::Annotated, {{"record", to_json(record)}});
    auto ack = apply_annotated(event.payload);
    after_append(event);
    return ack;
}

std::vector<std::vector<GanimalId>> Platform::tick_all() {
    std::unique_lock lock(mu_);
    std::vector<std::vector<GanimalId>> removed;
    for (WorldId w = 0; w < state_.worlds.size(); ++w) {
        const auto& event = append(now(), EventKind::Ticked, {{"world", w}, {"decay", config_.energy.decay}});
        removed.push_back(apply_ticked(event.payload));
        after_append(event);
    }
    return removed;
}

GroupComparison Platform::stats(Metric metric, std::string_view predicate) const {
    const GenomePredicate pred = parse_predicate(predicate);
    std::shared_lock lock(mu_);
    return state_.catalogue.group_compare(metric, predicate, [&](const GanimalId& id) {
        return pred(state_.ganimals.at(id).genome, taxonomy_);
    });
}

Ganimal Platform::ganimal(const GanimalId& id) const {
    std::shared_lock lock(mu_);
    auto it = state_.ganimals.find(id);
    if (it == state_.ganimals.end())
        fail(ErrorCode::UnknownGanimal, "unknown ganimal " + id.hex());
    return it->second;
}

json Platform::world_view(const std::string& user) {
    std::unique_lock lock(mu_);
    const WorldId w = ensure_user(user);
    const World& world = world_for(w);
    json population = json::array();
    for (const auto& [id, energy] : world.ranked_population())
        population.push_back({{"ganimal", to_json(state_.ganimals.at(id))},
                              {"energy", energy.energy},
                              {"last_fed_tick", energy.last_fed_tick}});
    return json{{"world_id", w},
                {"layout_variant", to_string(world.layout())},
                {"tick", world.tick_count()},
                {"seed_set_size", world.seed_set().size()},
                {"population", population}};
}

json Platform::leaderboard_view(const std::string& user, Characteristic c) {
    std::unique_lock lock(mu_);
    const WorldId w = ensure_user(user);
    const World& world = world_for(w);
    json entries = json::array();
    std::size_t rank = 0;
    for (const auto& id : world.leaderboard(c))
        entries.push_back({{"rank", ++rank},
                           {"mean", *world.board_score(c, id)},
                           {"ganimal", to_json(state_.ganimals.at(id))}});
    return json{{"world_id", w}, {"characteristic", to_string(c)}, {"entries", entries}};
}

void Platform::inspect(const std::function<void(const PlatformState&)>& reader) const {
    std::shared_lock lock(mu_);
    reader(state_);
}

std::vector<Event> Platform::events() const {
    std::shared_lock lock(mu_);
    return log_->events();
}

std::size_t Platform::event_count() const {
    std::shared_lock lock(mu_);
    return log_->size();
}

json Platform::state_json() const {
    std::shared_lock lock(mu_);
    return state_.to_json();
}

Digest256 Platform::state_hash() const {
    return sha256(state_json().dump());
}

void Platform::write_snapshot() {
    if (config_.data_dir.empty())
        return;
    const std::filesystem::path dir = config_.data_dir;
    const auto tmp = dir / "snapshot.json.tmp";
    {
        std::ofstream out(tmp);
        out << json{{"sequence_no", log_->last_sequence()}, {"state", state_.to_json()}}.dump();
        if (!out)
            fail(ErrorCode::ConfigError, "failed to write snapshot");
    }
    std::filesystem::rename(tmp, dir / "snapshot.json");
}

void Platform::apply(const Event& event) {
    const auto& p = event.payload;
    switch (event.kind) {
    case EventKind::UserAssigned: apply_user_assigned(p); break;
    case EventKind::WorldCreated: apply_world_created(p); break;
    case EventKind::GanimalDiscovered: apply_discovered(p); break;
    case EventKind::GanimalBred: apply_bred(p); break;
    case EventKind::Named: apply_named(p); break;
    case EventKind::Fed: apply_fed(p); break;
    case EventKind::Annotated: apply_annotated(p); break;
    case EventKind::Ticked: apply_ticked(p); break;
    }
}

void Platform::record_ganimal(const GanimalId& id, const Genome& genome, const ImageRef& image, WorldId world,
                              Tick tick, std::optional<std::string> creator, std::vector<GanimalId> lineage) {
    if (state_.ganimals.contains(id))
        return;
    state_.ganimals.emplace(id, Ganimal{id, genome, image, std::nullopt, std::move(lineage), world, tick,
                                        std::move(creator)});
    state_.catalogue.register_ganimal(id);
    cache_->remember(id, image);
}

void Platform::apply_user_assigned(const json& p) {
    state_.users.try_emplace(p.at("user").get<std::string>(), UserState{p.at("world").get<WorldId>(), 0});
}

void Platform::apply_world_created(const json& p) {
    const auto w = p.at("world_id").get<WorldId>();
    if (w != state_.worlds.size())
        fail(ErrorCode::ParseError, "worlds must be created in id order");
    World world(w, parse_layout(p.at("layout_variant").get<std::string>()));
    const double initial = p.at("initial_energy").get<double>();
    for (const auto& seed : p.at("seed_set")) {
        const auto genome = genome_from_json(seed.at("genome"));
        const auto id = canonical_id(genome);
        record_ganimal(id, genome, image_ref_from_json(seed.at("image")), w, 0, std::nullopt, {});
        world.add_to_seed_set(id, initial);
    }
    state_.worlds.push_back(std::move(world));
}

void Platform::apply_discovered(const json& p) {
    const auto user = p.at("user").get<std::string>();
    const auto w = p.at("world").get<WorldId>();
    const auto id = GanimalId::from_hex(p.at("ganimal_id").get<std::string>());
    ++state_.users.at(user).discoveries;
    World& world = world_for(w);
    if (p.contains("genome"))
        record_ganimal(id, genome_from_json(p.at("genome")), image_ref_from_json(p.at("image")), w,
                       world.tick_count(), user, {});
    world.register_ganimal(id);
}

void Platform::apply_bred(const json& p) {
    const auto user = p.at("user").get<std::string>();
    const auto w = p.at("world").get<WorldId>();
    const auto id = GanimalId::from_hex(p.at("ganimal_id").get<std::string>());
    std::vector<GanimalId> parents;
    for (const auto& parent : p.at("parents"))
        parents.push_back(GanimalId::from_hex(parent.get<std::string>()));
    World& world = world_for(w);
    record_ganimal(id, genome_from_json(p.at("genome")), image_ref_from_json(p.at("image")), w,
                   world.tick_count(), user, std::move(parents));
    world.register_ganimal(id);
}

void Platform::apply_named(const json& p) {
    state_.ganimals.at(GanimalId::from_hex(p.at("ganimal_id").get<std::string>())).name =
        p.at("name").get<std::string>();
}

EnergyState Platform::apply_fed(const json& p) {
    World& world = world_for(p.at("world").get<WorldId>());
    const auto id = GanimalId::from_hex(p.at("ganimal_id").get<std::string>());
    if (p.at("adopted").get<bool>())
        world.adopt(id, p.at("initial_energy").get<double>());
    return world.feed(id, p.at("amount").get<double>());
}

AnnotationAck Platform::apply_annotated(const json& p) {
    const auto record = annotation_from_json(p.at("record"));
    auto ack = state_.catalogue.record_annotation(record);
    World& world = world_for(record.world_id);
    for (Metric m : ack.metrics)
        if (auto c = characteristic_for(m))
            world.set_rating(*c, record.ganimal_id,
                             state_.catalogue.mean_rating_in_world(record.world_id, record.ganimal_id, m));
    return ack;
}

std::vector<GanimalId> Platform::apply_ticked(const json& p) {
    return world_for(p.at("world").get<WorldId>()).tick(p.at("decay").get<double>());
}

} // namespace ganimals
