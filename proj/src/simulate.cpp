#include "ganimals/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "ganimals/error.hpp"
#include "ganimals/platform.hpp"
#include "ganimals/rng.hpp"

namespace ganimals {

using nlohmann::json;

Preference profile_preference(std::string_view profile) {
    if (profile == "uniform")
        return {0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
    if (profile == "dog_lover")
        return {0.95, 0.1, 0.1, 0.1, 0.1, 0.1};
    if (profile == "insect_lover")
        return {0.1, 0.95, 0.1, 0.1, 0.1, 0.1};
    fail(ErrorCode::ConfigError, "unknown simulation profile '" + std::string(profile) + "'");
}

Flag category_flag(const Taxonomy& taxonomy, CategoryId id) {
    const auto& c = taxonomy.at(id);
    if (c.is_dog)
        return Flag::Dog;
    if (c.is_insect)
        return Flag::Insect;
    for (const auto& core : taxonomy.cores()) {
        if (std::find(core.category_ids.begin(), core.category_ids.end(), id) == core.category_ids.end())
            continue;
        switch (core.core) {
        case Core::Bird: return Flag::Bird;
        case Core::Aquatic: return Flag::Aquatic;
        case Core::Megafauna: return Flag::Megafauna;
        default: break;
        }
    }
    return Flag::Other;
}

namespace {

struct SimUser {
    std::string id;
    Preference preference{};
};

double match(const Preference& pref, const Genome& genome, const std::vector<Flag>& flags) {
    double m = 0.0;
    for (const auto& c : genome.components())
        m += c.weight * pref[static_cast<std::size_t>(flags[c.category])];
    return m;
}

bool has_flag(const Genome& genome, const std::vector<Flag>& flags, Flag f) {
    return std::any_of(genome.components().begin(), genome.components().end(),
                       [&](const Component& c) { return flags[c.category] == f; });
}

int clamp_rating(double x) {
    return static_cast<int>(std::clamp<long>(std::lround(x), kRatingMin, kRatingMax));
}

double entropy_of(const std::vector<GanimalId>& ids, const std::map<GanimalId, Ganimal>& ganimals) {
    std::map<CategoryId, double> mass;
    double total = 0.0;
    for (const auto& id : ids)
        for (const auto& c : ganimals.at(id).genome.components()) {
            mass[c.category] += c.weight;
            total += c.weight;
        }
    double h = 0.0;
    for (const auto& [cat, m] : mass)
        h -= (m / total) * std::log2(m / total);
    return h;
}

json comparison_or_error(const Platform& platform, std::string_view predicate) {
    try {
        return to_json(platform.stats(Metric::Cute, predicate));
    } catch (const Error& e) {
        return json{{"error", to_string(e.code())}, {"message", e.what()}};
    }
}

} // namespace

SimulationResult run_simulation(ServiceConfig config, const Taxonomy& taxonomy, const SimulationOptions& options) {
    config.master_seed = options.seed;
    config.resolution = options.resolution;
    config.data_dir = options.data_dir;
    config.backend.mode = "mock";
    config.validate();

    std::vector<std::string> profiles = options.world_profiles;
    if (profiles.empty())
        profiles.push_back("uniform");
    for (const auto& p : profiles)
        profile_preference(p);
    auto world_profile = [&](WorldId w) { return profiles[w % profiles.size()]; };

    std::vector<Flag> flags(taxonomy.size());
    for (const auto& c : taxonomy.categories())
        flags[c.id] = category_flag(taxonomy, c.id);

    MockBackend backend;
    std::int64_t logical_time = 0;
    Platform platform(config, taxonomy, backend, [&logical_time] { return ++logical_time; });
    Rng rng(derive_seed(options.seed, "simulate", "users", 0));

    std::vector<SimUser> users;
    for (std::size_t i = 0; i < options.n_users; ++i) {
        SimUser u{"sim-user-" + std::to_string(i), {}};
        const WorldId w = platform.assign(u.id);
        u.preference = profile_preference(world_profile(w));
        for (auto& p : u.preference)
            p = std::clamp(p + options.preference_jitter * (2.0 * rng.uniform01() - 1.0), 0.0, 1.0);
        users.push_back(std::move(u));
    }

    auto genome_of = [&](const GanimalId& id) {
        Genome g = platform.ganimal(id).genome;
        return g;
    };

    auto annotate = [&](const SimUser& u, const GanimalId& id, const Genome& g) {
        const double m = match(u.preference, g, flags);
        AnnotationRecord r;
        r.ganimal_id = id;
        SubjectiveRating ratings;
        double cute = 4.0 + rng.normal();
        if (has_flag(g, flags, Flag::Dog))
            cute += options.dog_cute_effect;
        if (has_flag(g, flags, Flag::Insect))
            cute += options.insect_cute_effect;
        ratings[Metric::Cute] = clamp_rating(cute);
        ratings[Metric::Memorable] = clamp_rating(1.0 + 6.0 * m + rng.normal());
        ratings[Metric::Realistic] = clamp_rating(4.0 + rng.normal());
        ratings[Metric::Creepy] = clamp_rating(4.0 - 2.0 * m + rng.normal());
        r.ratings = ratings;
        MorphologyAnnotation morph;
        morph[Feature::Hair] = has_flag(g, flags, Flag::Dog);
        morph[Feature::Feathers] = has_flag(g, flags, Flag::Bird);
        morph[Feature::LivesUnderwater] = has_flag(g, flags, Flag::Aquatic);
        morph[Feature::BiggerThanHousecat] = has_flag(g, flags, Flag::Megafauna);
        r.morphology = morph;
        platform.annotate(u.id, r);
    };

    // Feeding or breeding something that died in the meantime is a normal
    // miss for a synthetic user, not a harness failure.
    auto tolerant = [](auto&& action) {
        try {
            action();
        } catch (const Error& e) {
            switch (e.code()) {
            case ErrorCode::NotInWorld:
            case ErrorCode::IdenticalParents:
            case ErrorCode::WrongGeneration:
            case ErrorCode::SameCategory: break;
            default: throw;
            }
        }
    };

    std::size_t discoveries = 0, feeds = 0, annotations = 0, breeds = 0;
    for (std::size_t step = 0; step < options.n_steps; ++step) {
        for (const auto& u : users) {
            const auto d = platform.discover(u.id);
            ++discoveries;
            const Genome& g = d.ganimal.genome;
            const double m = match(u.preference, g, flags);
            if (rng.uniform01() < m) {
                tolerant([&] { platform.feed(u.id, d.ganimal.id); ++feeds; });
            }
            if (rng.uniform01() < m) {
                annotate(u, d.ganimal.id, g);
                ++annotations;
            }

            std::vector<GanimalId> living;
            const WorldId w = *platform.world_of(u.id);
            platform.inspect([&](const PlatformState& s) {
                for (const auto& [id, e] : s.worlds[w].population())
                    living.push_back(id);
            });
            for (std::size_t f = 0; f < options.feeds_per_step && !living.empty(); ++f) {
                const auto& id = living[rng.below(living.size())];
                if (rng.uniform01() < match(u.preference, genome_of(id), flags))
                    tolerant([&] { platform.feed(u.id, id); ++feeds; });
            }

            if (rng.uniform01() < options.breed_probability) {
                std::vector<GanimalId> g1;
                for (const auto& id : living)
                    if (genome_of(id).generation() == Generation::G1)
                        g1.push_back(id);
                if (g1.size() >= 2) {
                    const auto a = g1[rng.below(g1.size())];
                    const auto b = g1[rng.below(g1.size())];
                    if (a != b)
                        tolerant([&] { platform.breed(u.id, a, b); ++breeds; });
                }
            }
        }
        platform.tick_all();
    }

    json worlds = json::array();
    platform.inspect([&](const PlatformState& s) {
        for (const auto& world : s.worlds) {
            std::size_t n_users = 0;
            for (const auto& [name, us] : s.users)
                n_users += us.world == world.id();
            json boards = json::object();
            for (auto c : kAllCharacteristics) {
                json entries = json::array();
                const auto& board = world.leaderboard(c);
                for (std::size_t r = 0; r < board.size() && r < 10; ++r)
                    entries.push_back({{"ganimal_id", board[r].hex()}, {"mean", *world.board_score(c, board[r])}});
                boards[std::string(to_string(c))] = entries;
            }
            worlds.push_back({{"world_id", world.id()},
                              {"profile", world_profile(world.id())},
                              {"layout_variant", to_string(world.layout())},
                              {"users", n_users},
                              {"known_ganimals", world.known().size()},
                              {"population_size", world.population().size()},
                              {"entropy_bits", population_entropy(world, s.ganimals)},
                              {"seed_set_entropy_bits", entropy_of(world.seed_set(), s.ganimals)},
                              {"leaderboards", boards}});
        }
    });

    SimulationResult result;
    result.state_hash = platform.state_hash();
    result.events = platform.events();
    result.report = json{{"format", "ganimals-simulation-v1"},
                         {"seed", options.seed},
                         {"n_users", options.n_users},
                         {"n_steps", options.n_steps},
                         {"n_worlds", config.n_worlds},
                         {"counts",
                          {{"events", result.events.size()},
                           {"discoveries", discoveries},
                           {"feeds", feeds},
                           {"annotations", annotations},
                           {"breeds", breeds}}},
                         {"worlds", worlds},
                         {"comparisons",
                          {{"contains_dog", comparison_or_error(platform, "contains_dog")},
                           {"contains_insect", comparison_or_error(platform, "contains_insect")}}},
                         {"state_hash", result.state_hash.hex()}};
    return result;
}

} // namespace ganimals
