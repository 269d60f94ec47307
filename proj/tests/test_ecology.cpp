#include <doctest.h>

#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "ganimals/ecology.hpp"
#include "ganimals/error.hpp"
#include "support.hpp"

using namespace ganimals;
using test_support::bundled;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::ParseError;
}

GanimalId fake_id(int i) {
    return GanimalId{sha256("eco-" + std::to_string(i))};
}

} // namespace

TEST_CASE("assign_user") {
    CHECK(assign_user("alice", 4) == assign_user("alice", 4));
    for (int i = 0; i < 100; ++i)
        CHECK(assign_user("u" + std::to_string(i), 1) == 0);
    std::array<int, 4> counts{};
    const int n = 100000;
    for (int i = 0; i < n; ++i)
        ++counts[assign_user("synthetic-" + std::to_string(i), 4)];
    for (int c : counts)
        CHECK(std::abs(c / double(n) - 0.25) < 0.01);
}

TEST_CASE("layouts alternate") {
    CHECK(layout_for_world(0) == LayoutVariant::FeedLinear);
    CHECK(layout_for_world(1) == LayoutVariant::Spatial);
    CHECK(layout_for_world(2) == LayoutVariant::FeedLinear);
    CHECK(parse_layout(to_string(LayoutVariant::Spatial)) == LayoutVariant::Spatial);
}

TEST_CASE("create_world") {
    const auto& tax = bundled();
    Rng rng(1);
    auto created = create_world(rng, tax, 0, LayoutVariant::FeedLinear);
    CHECK(created.world.seed_set().size() == 100);
    CHECK(created.world.population().size() == 100);
    CHECK(created.seed_genomes.size() == 100);
    for (const auto& g : created.seed_genomes) {
        CHECK(g.generation() == Generation::G1);
        CHECK(created.world.population().at(canonical_id(g)).energy == 1.0);
    }

    Rng empty_rng(2);
    CHECK(create_world(empty_rng, tax, 1, LayoutVariant::Spatial, 0).world.population().empty());

    Rng other(3);
    auto second = create_world(other, tax, 1, LayoutVariant::Spatial);
    std::set<GanimalId> a(created.world.seed_set().begin(), created.world.seed_set().end());
    for (const auto& id : second.world.seed_set())
        CHECK_FALSE(a.contains(id));
}

TEST_CASE("feed and tick") {
    World w(0, LayoutVariant::FeedLinear);
    const auto a = fake_id(1);
    w.add_to_seed_set(a, 1.0);
    CHECK(w.feed(a, 0.5).energy == 1.5);
    CHECK(code_of([&] { w.feed(fake_id(2), 0.5); }) == ErrorCode::NotInWorld);

    World q(1, LayoutVariant::Spatial);
    q.add_to_seed_set(a, 1.0);
    for (int t = 1; t <= 3; ++t)
        CHECK(q.tick(0.25).empty());
    CHECK(q.tick(0.25) == std::vector<GanimalId>{a});
    CHECK(code_of([&] { q.feed(a, 1.0); }) == ErrorCode::NotInWorld);
    CHECK(q.was_removed(a));
    CHECK_FALSE(q.adoptable(a));

    World empty(2, LayoutVariant::FeedLinear);
    CHECK(empty.tick(0.1).empty());
    CHECK(empty.tick_count() == 1);
    CHECK(code_of([&] { empty.tick(0.0); }) == ErrorCode::PreconditionViolation);
}

TEST_CASE("adoption happens only for known, never-adopted ganimals") {
    World w(0, LayoutVariant::FeedLinear);
    const auto a = fake_id(1);
    CHECK(code_of([&] { w.adopt(a, 1.0); }) == ErrorCode::NotInWorld);
    w.register_ganimal(a);
    CHECK(w.adoptable(a));
    w.adopt(a, 1.0);
    CHECK(w.in_population(a));
    CHECK(code_of([&] { w.adopt(a, 1.0); }) == ErrorCode::PreconditionViolation);
}

TEST_CASE("fed at least decay every tick survives") {
    World w(0, LayoutVariant::FeedLinear);
    const auto a = fake_id(1);
    w.add_to_seed_set(a, 0.3);
    for (int t = 0; t < 500; ++t) {
        w.feed(a, 0.1);
        CHECK(w.tick(0.1).empty());
    }
    CHECK(w.in_population(a));
}

TEST_CASE("leaderboards") {
    World w(0, LayoutVariant::FeedLinear);
    const auto a = fake_id(1), b = fake_id(2), c = fake_id(3);
    w.register_ganimal(a);
    w.tick(0.1);
    w.register_ganimal(b);
    w.register_ganimal(c);

    CHECK(w.update_leaderboard(Characteristic::Cute, {{a, 4.5}, {b, 3.0}}) == std::vector<GanimalId>{a, b});
    CHECK(w.update_leaderboard(Characteristic::Cute, {{b, 4.0}, {a, 4.0}}) == std::vector<GanimalId>{a, b});
    // Same first-seen tick falls through to id order.
    const auto& tie = w.update_leaderboard(Characteristic::Creepy, {{b, 2.0}, {c, 2.0}});
    CHECK(tie == (b < c ? std::vector<GanimalId>{b, c} : std::vector<GanimalId>{c, b}));
    CHECK(code_of([&] { w.update_leaderboard(Characteristic::Cute, {{fake_id(9), 1.0}}); }) ==
          ErrorCode::ValidationError);

    w.set_rating(Characteristic::Cute, c, 5.0);
    CHECK(w.leaderboard(Characteristic::Cute) == std::vector<GanimalId>{c, a, b});
    w.set_rating(Characteristic::Cute, c, std::nullopt);
    CHECK(w.leaderboard(Characteristic::Cute) == std::vector<GanimalId>{a, b});
    CHECK(*w.board_score(Characteristic::Cute, a) == 4.0);
}

TEST_CASE("incremental ratings match a full rebuild") {
    Rng rng(4);
    World inc(0, LayoutVariant::FeedLinear), full(0, LayoutVariant::FeedLinear);
    std::map<GanimalId, double> truth;
    for (int i = 0; i < 40; ++i) {
        inc.register_ganimal(fake_id(i));
        full.register_ganimal(fake_id(i));
        if (i % 7 == 0) {
            inc.tick(0.1);
            full.tick(0.1);
        }
    }
    for (int step = 0; step < 500; ++step) {
        const auto id = fake_id(static_cast<int>(rng.below(40)));
        const double v = 1.0 + static_cast<double>(rng.below(13)) * 0.5;
        truth[id] = v;
        inc.set_rating(Characteristic::Memorable, id, v);
    }
    full.update_leaderboard(Characteristic::Memorable, truth);
    CHECK(inc.leaderboard(Characteristic::Memorable) == full.leaderboard(Characteristic::Memorable));
}

TEST_CASE("ranked population orders by energy") {
    World w(0, LayoutVariant::FeedLinear);
    w.add_to_seed_set(fake_id(1), 1.0);
    w.add_to_seed_set(fake_id(2), 1.0);
    w.feed(fake_id(2), 0.25);
    const auto ranked = w.ranked_population();
    REQUIRE(ranked.size() == 2);
    CHECK(ranked[0].first == fake_id(2));
    CHECK(ranked[0].second.energy > ranked[1].second.energy);
}

TEST_CASE("world json round trip") {
    const auto& tax = bundled();
    Rng rng(5);
    auto world = create_world(rng, tax, 3, LayoutVariant::Spatial, 20).world;
    world.feed(world.seed_set()[0], 0.25);
    world.tick(0.1);
    world.set_rating(Characteristic::Cute, world.seed_set()[1], 6.5);
    const auto again = World::from_json(world.to_json());
    CHECK(again == world);
    CHECK(again.to_json() == world.to_json());
}

TEST_CASE("energy config validation") {
    CHECK_NOTHROW(EnergyConfig{}.validate());
    CHECK(code_of([] { EnergyConfig{1.0, 0.0, 0.25}.validate(); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { EnergyConfig{0.0, 0.1, 0.25}.validate(); }) == ErrorCode::ConfigError);
}
