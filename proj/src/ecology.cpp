#include "ganimals/ecology.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "ganimals/error.hpp"

namespace ganimals {

using nlohmann::json;

std::string_view to_string(LayoutVariant v) noexcept {
    return v == LayoutVariant::FeedLinear ? "feed_linear" : "spatial";
}

LayoutVariant parse_layout(std::string_view text) {
    if (text == "feed_linear")
        return LayoutVariant::FeedLinear;
    if (text == "spatial")
        return LayoutVariant::Spatial;
    fail(ErrorCode::ParseError, "unknown layout variant '" + std::string(text) + "'");
}

LayoutVariant layout_for_world(WorldId id) noexcept {
    return id % 2 == 0 ? LayoutVariant::FeedLinear : LayoutVariant::Spatial;
}

void EnergyConfig::validate() const {
    if (!(initial > 0.0) || !std::isfinite(initial))
        fail(ErrorCode::ConfigError, "initial energy must be positive");
    if (!(decay > 0.0) || !std::isfinite(decay))
        fail(ErrorCode::ConfigError, "decay must be positive");
    if (!(feed_amount > 0.0) || !std::isfinite(feed_amount))
        fail(ErrorCode::ConfigError, "feed amount must be positive");
}

WorldId assign_user(std::string_view user_id, std::uint32_t n_worlds) {
    if (n_worlds == 0)
        fail(ErrorCode::PreconditionViolation, "need at least one world");
    return static_cast<WorldId>(sha256(user_id).prefix_u64() % n_worlds);
}

World::World(WorldId id, LayoutVariant layout) : id_(id), layout_(layout) {}

void World::register_ganimal(const GanimalId& id) {
    first_seen_.try_emplace(id, tick_);
}

std::optional<Tick> World::first_seen(const GanimalId& id) const {
    auto it = first_seen_.find(id);
    if (it == first_seen_.end())
        return std::nullopt;
    return it->second;
}

bool World::adoptable(const GanimalId& id) const noexcept {
    return knows(id) && !in_population(id) && !was_removed(id);
}

EnergyState World::adopt(const GanimalId& id, double initial_energy) {
    if (!knows(id))
        fail(ErrorCode::NotInWorld, "ganimal " + id.hex() + " is not part of world " + std::to_string(id_));
    if (!adoptable(id))
        fail(ErrorCode::PreconditionViolation, "ganimal " + id.hex() + " cannot be adopted again");
    if (!(initial_energy > kEnergyEpsilon))
        fail(ErrorCode::PreconditionViolation, "adopted ganimals need positive energy");
    return population_[id] = EnergyState{initial_energy, tick_};
}

void World::add_to_seed_set(const GanimalId& id, double initial_energy) {
    register_ganimal(id);
    adopt(id, initial_energy);
    seed_set_.push_back(id);
}

EnergyState World::feed(const GanimalId& id, double amount) {
    if (!(amount > 0.0) || !std::isfinite(amount))
        fail(ErrorCode::PreconditionViolation, "feed amount must be positive");
    auto it = population_.find(id);
    if (it == population_.end())
        fail(ErrorCode::NotInWorld, "ganimal " + id.hex() + " is not alive in world " + std::to_string(id_));
    it->second.energy += amount;
    it->second.last_fed_tick = tick_;
    return it->second;
}

std::vector<GanimalId> World::tick(double decay) {
    if (!(decay > 0.0) || !std::isfinite(decay))
        fail(ErrorCode::PreconditionViolation, "decay must be positive");
    std::vector<GanimalId> removed;
    for (auto it = population_.begin(); it != population_.end();) {
        double& e = it->second.energy;
        e = std::max(0.0, e - decay);
        if (e <= kEnergyEpsilon) {
            removed.push_back(it->first);
            removed_.emplace(it->first, tick_ + 1);
            it = population_.erase(it);
        } else {
            ++it;
        }
    }
    ++tick_;
    return removed;
}

bool World::ranks_before(Characteristic c, const GanimalId& a, const GanimalId& b) const {
    const auto& scores = scores_[static_cast<std::size_t>(c)];
    const double sa = scores.at(a);
    const double sb = scores.at(b);
    if (sa != sb)
        return sa > sb;
    const Tick ta = first_seen_.at(a);
    const Tick tb = first_seen_.at(b);
    if (ta != tb)
        return ta < tb;
    return a < b;
}

const std::vector<GanimalId>& World::update_leaderboard(Characteristic c,
                                                        const std::map<GanimalId, double>& ratings) {
    for (const auto& [id, mean] : ratings) {
        if (!knows(id))
            fail(ErrorCode::ValidationError,
                 "rating for ganimal " + id.hex() + " which never appeared in world " + std::to_string(id_));
        if (!std::isfinite(mean))
            fail(ErrorCode::ValidationError, "non-finite mean rating");
    }
    const auto slot = static_cast<std::size_t>(c);
    scores_[slot] = ratings;
    auto& board = boards_[slot];
    board.clear();
    for (const auto& [id, mean] : ratings)
        board.push_back(id);
    std::sort(board.begin(), board.end(),
              [&](const GanimalId& a, const GanimalId& b) { return ranks_before(c, a, b); });
    return board;
}

void World::set_rating(Characteristic c, const GanimalId& id, std::optional<double> mean) {
    if (!knows(id))
        fail(ErrorCode::ValidationError,
             "rating for ganimal " + id.hex() + " which never appeared in world " + std::to_string(id_));
    const auto slot = static_cast<std::size_t>(c);
    auto& scores = scores_[slot];
    auto& board = boards_[slot];
    if (scores.contains(id))
        board.erase(std::find(board.begin(), board.end(), id));
    if (!mean) {
        scores.erase(id);
        return;
    }
    scores[id] = *mean;
    auto pos = std::lower_bound(board.begin(), board.end(), id,
                                [&](const GanimalId& a, const GanimalId& b) { return ranks_before(c, a, b); });
    board.insert(pos, id);
}

std::optional<double> World::board_score(Characteristic c, const GanimalId& id) const {
    const auto& scores = scores_[static_cast<std::size_t>(c)];
    auto it = scores.find(id);
    if (it == scores.end())
        return std::nullopt;
    return it->second;
}

std::vector<std::pair<GanimalId, EnergyState>> World::ranked_population() const {
    std::vector<std::pair<GanimalId, EnergyState>> out(population_.begin(), population_.end());
    std::sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
        if (a.second.energy != b.second.energy)
            return a.second.energy > b.second.energy;
        const Tick ta = first_seen_.at(a.first);
        const Tick tb = first_seen_.at(b.first);
        if (ta != tb)
            return ta < tb;
        return a.first < b.first;
    });
    return out;
}

json World::to_json() const {
    json j;
    j["world_id"] = id_;
    j["layout_variant"] = to_string(layout_);
    j["tick"] = tick_;
    json seeds = json::array();
    for (const auto& id : seed_set_)
        seeds.push_back(id.hex());
    j["seed_set"] = seeds;
    json pop = json::object();
    for (const auto& [id, e] : population_)
        pop[id.hex()] = {{"energy", e.energy}, {"last_fed_tick", e.last_fed_tick}};
    j["population"] = pop;
    json seen = json::object();
    for (const auto& [id, t] : first_seen_)
        seen[id.hex()] = t;
    j["first_seen"] = seen;
    json removed = json::object();
    for (const auto& [id, t] : removed_)
        removed[id.hex()] = t;
    j["removed"] = removed;
    json boards = json::object();
    for (auto c : kAllCharacteristics) {
        json entries = json::array();
        for (const auto& id : leaderboard(c))
            entries.push_back({{"id", id.hex()}, {"mean", *board_score(c, id)}});
        boards[std::string(to_string(c))] = entries;
    }
    j["leaderboards"] = boards;
    return j;
}

World World::from_json(const json& j) {
    World w(j.at("world_id").get<WorldId>(), parse_layout(j.at("layout_variant").get<std::string>()));
    w.tick_ = j.at("tick").get<Tick>();
    for (const auto& id : j.at("seed_set"))
        w.seed_set_.push_back(GanimalId::from_hex(id.get<std::string>()));
    for (const auto& [id, e] : j.at("population").items())
        w.population_[GanimalId::from_hex(id)] =
            EnergyState{e.at("energy").get<double>(), e.at("last_fed_tick").get<Tick>()};
    for (const auto& [id, t] : j.at("first_seen").items())
        w.first_seen_[GanimalId::from_hex(id)] = t.get<Tick>();
    for (const auto& [id, t] : j.at("removed").items())
        w.removed_[GanimalId::from_hex(id)] = t.get<Tick>();
    for (auto c : kAllCharacteristics) {
        const auto slot = static_cast<std::size_t>(c);
        for (const auto& entry : j.at("leaderboards").at(std::string(to_string(c)))) {
            const auto id = GanimalId::from_hex(entry.at("id").get<std::string>());
            w.scores_[slot][id] = entry.at("mean").get<double>();
            w.boards_[slot].push_back(id);
        }
    }
    return w;
}

CreatedWorld create_world(Rng& rng, const Taxonomy& taxonomy, WorldId id, LayoutVariant layout,
                          std::size_t n_seed, const EnergyConfig& energy,
                          const DiscoveryOptions& options) {
    energy.validate();
    CreatedWorld created{World(id, layout), {}};
    const Leaderboards empty{};
    std::set<GanimalId> taken;
    std::size_t attempts = 0;
    while (created.seed_genomes.size() < n_seed) {
        if (++attempts > 100 * (n_seed + 1))
            fail(ErrorCode::PreconditionViolation, "could not draw enough distinct seed ganimals");
        auto draw = next_discovery(rng, taxonomy, empty, options);
        auto genome = std::get<Genome>(std::move(draw.outcome));
        const auto gid = canonical_id(genome);
        if (!taken.insert(gid).second)
            continue;
        created.world.add_to_seed_set(gid, energy.initial);
        created.seed_genomes.push_back(std::move(genome));
    }
    return created;
}

} // namespace ganimals
