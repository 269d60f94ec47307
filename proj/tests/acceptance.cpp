// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include <httplib.h>

#include <nlohmann/json.hpp>

#include "ganimals/api.hpp"
#include "ganimals/error.hpp"
#include "ganimals/platform.hpp"
#include "ganimals/sampler.hpp"
#include "ganimals/simulate.hpp"
#include "ganimals/stats.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace ganimals;
using nlohmann::json;
using test_support::bundled;

namespace {

/// Collects failed expectations for one criterion.
struct Check {
    std::vector<std::string> failures;
    std::vector<std::string> notes;

    void expect(bool ok, const std::string& what) {
        if (!ok)
            failures.push_back(what);
    }
    void note(const std::string& s) { notes.push_back(s); }
};

std::string fmt(double x, int digits = 4) {
    std::ostringstream ss;
    ss.precision(digits);
    ss << std::fixed << x;
    return ss.str();
}

int run(int number, const std::string& title, double limit_seconds, const std::function<void(Check&)>& body) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
        body(check);
    } catch (const std::exception& e) {
        check.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    check.expect(secs < limit_seconds, "runtime " + fmt(secs, 2) + " s exceeds " + fmt(limit_seconds, 0) + " s");
    const bool ok = check.failures.empty();
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << number << ": " << title << " (" << fmt(secs, 2)
              << " s)";
    for (const auto& n : check.notes)
        std::cout << "; " << n;
    std::cout << "\n";
    for (const auto& f : check.failures)
        std::cout << "    " << f << "\n";
    std::cout.flush();
    return ok ? 0 : 1;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void possibility_space(Check& c) {
    const auto counts = count_space(396);
    c.expect(counts == SpaceCounts{396, 78210, 3058362945ULL}, "count_space(396) wrong");
    c.note("(" + std::to_string(counts.g0) + ", " + std::to_string(counts.g1) + ", " + std::to_string(counts.g2) + ")");
    for (int n = 1; n <= 6; ++n) {
        const auto brute = oracle::enumerate_space(n);
        const auto formula = count_space(static_cast<std::uint64_t>(n));
        c.expect(brute.g0 == formula.g0 && brute.g1 == formula.g1 && brute.g2 == formula.g2,
                 "brute force disagrees at n=" + std::to_string(n));
    }
}

void mixture_fidelity(Check& c) {
    Rng rng(derive_seed(1, "acceptance", "mixture"));
    std::array<int, 4> counts{};
    const int n = 100000;
    for (int i = 0; i < n; ++i)
        ++counts[static_cast<std::size_t>(choose_procedure(rng, PolicyMix{}))];
    const std::array<double, 4> target = {0.30, 0.30, 0.30, 0.10};
    std::string freq;
    for (std::size_t i = 0; i < 4; ++i) {
        const double f = counts[i] / double(n);
        freq += (i ? ", " : "") + fmt(f);
        c.expect(std::abs(f - target[i]) <= 0.01, "procedure " + std::to_string(i) + " frequency " + fmt(f));
    }
    c.note("frequencies (" + freq + ")");
}

void dog_downsampling(Check& c) {
    const auto& tax = bundled();
    const double S = static_cast<double>(tax.species().size());
    Rng rng(derive_seed(1, "acceptance", "dogs"));
    const int n = 100000;
    int strat_first = 0, strat_second = 0, uni_first = 0, uni_second = 0;
    for (int i = 0; i < n; ++i) {
        const auto [a, b] = sample_stratified_pair(rng, tax);
        strat_first += tax.at(a).is_dog;
        strat_second += tax.at(b).is_dog;
        const auto [x, y] = sample_uniform_pair(rng, tax);
        uni_first += tax.at(x).is_dog;
        uni_second += tax.at(y).is_dog;
    }
    const double s1 = strat_first / double(n), s2 = strat_second / double(n);
    const double u1 = uni_first / double(n), u2 = uni_second / double(n);
    c.expect(std::abs(s1 - 1.0 / S) <= 0.005, "stratified slot 1 dog rate " + fmt(s1));
    c.expect(std::abs(s2 - 1.0 / S) <= 0.005, "stratified slot 2 dog rate " + fmt(s2));
    c.expect(std::abs(u1 - 118.0 / 396.0) <= 0.005, "uniform slot 1 dog rate " + fmt(u1));
    c.expect(std::abs(u2 - 118.0 / 396.0) <= 0.005, "uniform slot 2 dog rate " + fmt(u2));
    c.note("S=" + std::to_string(static_cast<int>(S)) + " stratified " + fmt(s1) + "/" + fmt(s2) + " vs 1/S " +
           fmt(1.0 / S) + ", uniform " + fmt(u1) + "/" + fmt(u2) + " vs " + fmt(118.0 / 396.0));
}

void rank_exploitation(Check& c) {
    std::vector<GanimalId> board;
    for (int i = 0; i < 25; ++i)
        board.push_back(GanimalId{sha256("board-" + std::to_string(i))});
    Rng rng(derive_seed(1, "acceptance", "ranks"));
    const int n = 100000;
    int first = 0, tenth = 0, beyond = 0;
    for (int i = 0; i < n; ++i) {
        const auto& id = sample_leaderboard(rng, board, 10);
        if (id == board[0])
            ++first;
        else if (id == board[9])
            ++tenth;
        else if (std::find(board.begin() + 10, board.end(), id) != board.end())
            ++beyond;
    }
    const double p1 = first / double(n), p10 = tenth / double(n);
    c.expect(std::abs(p1 - 10.0 / 55) <= 0.01, "P(rank 1) " + fmt(p1));
    c.expect(std::abs(p10 - 1.0 / 55) <= 0.005, "P(rank 10) " + fmt(p10));
    c.expect(beyond == 0, "draws outside the top 10");
    c.note("P(rank 1)=" + fmt(p1) + " vs " + fmt(10.0 / 55) + ", P(rank 10)=" + fmt(p10) + " vs " + fmt(1.0 / 55));
}

std::string user_in(WorldId w, std::uint32_t n_worlds, int skip) {
    for (int i = 0;; ++i) {
        auto u = "probe-user-" + std::to_string(i);
        if (assign_user(u, n_worlds) == w && skip-- == 0)
            return u;
    }
}

void ecology_dynamics(Check& c) {
    // Energy property suite.
    Rng rng(derive_seed(1, "acceptance", "energy"));
    int removal_mismatch = 0, fed_removed = 0;
    for (int i = 0; i < 1000; ++i) {
        const double e0 = 0.05 + 4.95 * rng.uniform01();
        const double decay = 0.01 + 0.99 * rng.uniform01();
        const auto expected = static_cast<long>(std::ceil(static_cast<long double>(e0) / decay));
        const GanimalId id{sha256("energy-" + std::to_string(i))};

        World unfed(0, LayoutVariant::FeedLinear);
        unfed.add_to_seed_set(id, e0);
        long removed_at = -1;
        for (long t = 1; t <= expected + 5 && removed_at < 0; ++t)
            if (!unfed.tick(decay).empty())
                removed_at = t;
        removal_mismatch += removed_at != expected;

        World fed(0, LayoutVariant::FeedLinear);
        fed.add_to_seed_set(id, e0);
        const double amount = decay * (1.0 + rng.uniform01());
        for (long t = 1; t <= expected + 50; ++t) {
            fed.feed(id, amount);
            fed_removed += !fed.tick(decay).empty();
        }
    }
    c.expect(removal_mismatch == 0, std::to_string(removal_mismatch) + " removal-time mismatches");
    c.expect(fed_removed == 0, std::to_string(fed_removed) + " fed ganimals removed");

    // Cross-world probes against the service.
    ServiceConfig config;
    config.n_worlds = 4;
    config.seed_set_size = 20;
    config.resolution = 8;
    config.master_seed = 99;
    MockBackend backend;
    Platform p(config, bundled(), backend);
    std::vector<std::vector<std::string>> users(4);
    for (WorldId w = 0; w < 4; ++w)
        for (int k = 0; k < 3; ++k)
            users[w].push_back(user_in(w, 4, k));

    auto known_in = [&](WorldId w) {
        std::vector<GanimalId> ids;
        p.inspect([&](const PlatformState& s) {
            for (const auto& [id, t] : s.worlds[w].known())
                ids.push_back(id);
        });
        return ids;
    };
    auto worlds_snapshot = [&] {
        std::vector<World> ws;
        p.inspect([&](const PlatformState& s) { ws = s.worlds; });
        return ws;
    };
    auto rejected_as = [](const std::function<void()>& f, std::initializer_list<ErrorCode> codes) {
        try {
            f();
        } catch (const Error& e) {
            return std::find(codes.begin(), codes.end(), e.code()) != codes.end();
        }
        return false;
    };

    Rng probe(derive_seed(1, "acceptance", "isolation"));
    int violations = 0;
    const int probes = 10000;
    for (int i = 0; i < probes; ++i) {
        const WorldId w = static_cast<WorldId>(probe.below(4));
        const auto& user = users[w][probe.below(3)];
        const WorldId other = static_cast<WorldId>((w + 1 + probe.below(3)) % 4);
        const auto before = worlds_snapshot();
        const auto mine = known_in(w);
        std::vector<GanimalId> foreign;
        for (const auto& id : known_in(other))
            if (!std::binary_search(mine.begin(), mine.end(), id))
                foreign.push_back(id);

        const auto op = probe.below(8);
        bool touched_only_own = true;
        if (op == 0 || op == 1) {
            const auto d = p.discover(user);
            if (!d.is_new)
                violations += !std::binary_search(mine.begin(), mine.end(), d.ganimal.id);
        } else if (op == 2 && !foreign.empty()) {
            const auto& id = foreign[probe.below(foreign.size())];
            violations += !rejected_as([&] { p.feed(user, id); }, {ErrorCode::NotInWorld});
        } else if (op == 3 && !foreign.empty()) {
            AnnotationRecord r;
            r.ganimal_id = foreign[probe.below(foreign.size())];
            SubjectiveRating s;
            s[Metric::Cute] = 1 + static_cast<int>(probe.below(7));
            r.ratings = s;
            violations += !rejected_as([&] { p.annotate(user, r); }, {ErrorCode::CrossWorld});
        } else if (op == 4 && !foreign.empty() && !mine.empty()) {
            const auto& a = mine[probe.below(mine.size())];
            const auto& b = foreign[probe.below(foreign.size())];
            violations += !rejected_as([&] { p.breed(user, a, b); }, {ErrorCode::CrossWorld});
        } else if (op == 5 && !mine.empty()) {
            const auto& id = mine[probe.below(mine.size())];
            try {
                p.feed(user, id);
            } catch (const Error& e) {
                violations += e.code() != ErrorCode::NotInWorld;
            }
        } else if (op == 6 && !mine.empty()) {
            AnnotationRecord r;
            r.ganimal_id = mine[probe.below(mine.size())];
            SubjectiveRating s;
            s[Metric::Cute] = 1 + static_cast<int>(probe.below(7));
            s[Metric::Creepy] = 1 + static_cast<int>(probe.below(7));
            r.ratings = s;
            p.annotate(user, r);
        } else if (op == 7) {
            if (probe.below(20) == 0) {
                p.tick_all();
                touched_only_own = false;
            } else if (mine.size() >= 2) {
                const auto& a = mine[probe.below(mine.size())];
                const auto& b = mine[probe.below(mine.size())];
                try {
                    p.breed(user, a, b);
                } catch (const Error& e) {
                    violations += e.code() != ErrorCode::IdenticalParents && e.code() != ErrorCode::WrongGeneration;
                }
            }
        }

        const auto after = worlds_snapshot();
        if (touched_only_own)
            for (WorldId v = 0; v < 4; ++v)
                if (v != w)
                    violations += !(after[v] == before[v]);
        // Population and boards never reference ganimals the world has not seen.
        const auto& world = after[w];
        for (const auto& [id, e] : world.population())
            violations += !world.knows(id);
        for (auto ch : kAllCharacteristics)
            for (const auto& id : world.leaderboard(ch))
                violations += !world.knows(id);
    }
    c.expect(violations == 0, std::to_string(violations) + " isolation violations");
    c.note("1000 energy pairs, " + std::to_string(probes) + " cross-world probes, " + std::to_string(violations) +
           " violations");
}

std::vector<double> normals(Rng& rng, std::size_t n, double mu, double sd) {
    std::vector<double> xs(n);
    for (auto& x : xs)
        x = mu + sd * rng.normal();
    return xs;
}

void statistics(Check& c) {
    // Planted effects through the full service path.
    ServiceConfig config;
    SimulationOptions sim;
    sim.n_users = 100;
    sim.n_steps = 60;
    sim.seed = 2024;
    const auto report = run_simulation(config, bundled(), sim).report;
    const auto& dog = report.at("comparisons").at("contains_dog");
    const auto& insect = report.at("comparisons").at("contains_insect");
    c.expect(!dog.contains("error") && dog.at("mean_with") > dog.at("mean_without") && dog.at("p_value") < 0.05,
             "dog effect not recovered: " + dog.dump());
    c.expect(!insect.contains("error") && insect.at("mean_with") < insect.at("mean_without") &&
                 insect.at("p_value") < 0.05,
             "insect effect not recovered: " + insect.dump());

    // Planted synthetic per-ganimal means, checked against the oracle.
    Rng rng(derive_seed(1, "acceptance", "stats"));
    {
        const auto with = normals(rng, 200, 5.5, 1.0);
        const auto without = normals(rng, 200, 4.0, 1.0);
        const auto r = welch_t_test(with, without);
        c.expect(r.mean_a > r.mean_b && r.p_value < 0.05, "synthetic planted effect not significant");
        const double q = oracle::permutation_p(with, without, 10000, 77);
        c.expect(std::abs(r.p_value - q) <= 0.02, "planted instance p " + fmt(r.p_value) + " vs oracle " + fmt(q));
    }

    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const auto na = 5 + rng.below(46), nb = 5 + rng.below(46);
        const auto a = normals(rng, na, 0.0, 1.0);
        const auto b = normals(rng, nb, 0.8 * rng.uniform01(), 1.0);
        const double p = welch_t_test(a, b).p_value;
        const double q = oracle::permutation_p(a, b, 10000, 1000 + static_cast<std::uint64_t>(i));
        worst = std::max(worst, std::abs(p - q));
    }
    c.expect(worst <= 0.02, "Welch vs permutation max gap " + fmt(worst));

    // Null calibration through the annotation store.
    int rejections = 0;
    const int runs = 500;
    for (int run = 0; run < runs; ++run) {
        AnnotationStore store;
        std::set<GanimalId> in_group;
        for (int g = 0; g < 60; ++g) {
            const GanimalId id{sha256("null-" + std::to_string(run) + "-" + std::to_string(g))};
            store.register_ganimal(id);
            if (g % 2 == 0)
                in_group.insert(id);
            for (int u = 0; u < 3; ++u) {
                AnnotationRecord r;
                r.user_id = "rater-" + std::to_string(u);
                r.ganimal_id = id;
                SubjectiveRating s;
                s[Metric::Cute] = static_cast<int>(std::clamp<long>(std::lround(4.0 + 1.2 * rng.normal()), 1, 7));
                r.ratings = s;
                store.record_annotation(r);
            }
        }
        const auto cmp = store.group_compare(Metric::Cute, "null", [&](const GanimalId& id) {
            return in_group.contains(id);
        });
        rejections += cmp.p_value < 0.05;
    }
    const double rate = rejections / double(runs);
    c.expect(std::abs(rate - 0.05) <= 0.02, "null rejection rate " + fmt(rate));
    c.note("dog p=" + fmt(dog.at("p_value").get<double>(), 6) + " insect p=" +
           fmt(insect.at("p_value").get<double>(), 6) + ", oracle max gap " + fmt(worst) + ", null rate " + fmt(rate, 3));
}

void determinism(Check& c) {
    test_support::TempDir dir;
    const std::string cli = GANIMALS_CLI_PATH;
    const auto a = dir.path() / "a.json", b = dir.path() / "b.json";
    for (const auto& out : {a, b}) {
        const std::string cmd = "\"" + cli + "\" simulate --users 100 --steps 200 --seed 7 --out \"" + out.string() + "\"";
        c.expect(std::system(cmd.c_str()) == 0, "simulate exited non-zero");
    }
    const auto ra = slurp(a), rb = slurp(b);
    c.expect(!ra.empty() && ra == rb, "reports differ");

    ServiceConfig config;
    SimulationOptions sim;
    sim.n_users = 100;
    sim.n_steps = 200;
    sim.seed = 7;
    sim.data_dir = (dir.path() / "log").string();
    const auto start = std::chrono::steady_clock::now();
    const auto result = run_simulation(config, bundled(), sim);
    const double single = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.expect(single < 60.0, "100 users x 200 steps x 4 worlds took " + fmt(single, 2) + " s");
    c.expect(result.report.dump(2) + "\n" == ra, "in-process report differs from the CLI report");

    config.data_dir = sim.data_dir;
    MockBackend backend;
    {
        Platform replayed(config, bundled(), backend);
        c.expect(replayed.state_hash() == result.state_hash, "snapshot+log replay hash differs");
    }
    std::filesystem::remove(dir.path() / "log" / "snapshot.json");
    Platform from_log(config, bundled(), backend);
    c.expect(from_log.state_hash() == result.state_hash, "full log replay hash differs");
    c.note("single persisted run " + fmt(single, 2) + " s, " + std::to_string(result.events.size()) +
           " events, state " + result.state_hash.hex().substr(0, 16));
}

void breeding_algebra(Check& c) {
    const auto& tax = bundled();
    Rng rng(derive_seed(1, "acceptance", "breeding"));
    const auto& cats = tax.categories();
    int checked = 0;
    for (int i = 0; i < 5000; ++i) {
        std::array<CategoryId, 4> ids;
        for (auto& id : ids)
            id = cats[rng.below(cats.size())].id;
        if (std::set<CategoryId>(ids.begin(), ids.end()).size() != 4)
            continue;
        const auto a = make_g1(tax, ids[0], ids[1], 0.5, rng.next_u64());
        const auto b = make_g1(tax, ids[2], ids[3], 0.5, rng.next_u64());
        const auto child = breed_quad(a, b);
        double sum = 0.0;
        bool quarters = child.components().size() == 4;
        for (const auto& comp : child.components()) {
            quarters = quarters && comp.weight == 0.25;
            sum += comp.weight;
        }
        c.expect(quarters, "disjoint parents did not give four 0.25 weights");
        c.expect(std::abs(sum - 1.0) <= 1e-12, "weights do not sum to 1");
        c.expect(canonical_id(child) == canonical_id(breed_quad(b, a)), "id changes under parent swap");

        const auto shared = make_g1(tax, ids[0], ids[2], 0.5, rng.next_u64());
        const auto s = breed_quad(a, shared);
        c.expect(s.components().size() == 3 && s.weight_of(ids[0]) == 0.5 && s.weight_of(ids[1]) == 0.25 &&
                     s.weight_of(ids[2]) == 0.25,
                 "shared-parent weights wrong");
        c.expect(canonical_id(s) == canonical_id(breed_quad(shared, a)), "shared id changes under parent swap");
        ++checked;
    }
    c.note(std::to_string(checked) + " random parent sets");
}

void api_flow(Check& c) {
    ServiceConfig config;
    config.resolution = 64;
    MockBackend backend;
    Platform platform(config, bundled(), backend);
    Api api(platform);
    httplib::Server server;
    api.mount(server);
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    httplib::Client client("127.0.0.1", port);

    auto post = [&](const std::string& path, const json& body) {
        auto res = client.Post(path, body.dump(), "application/json");
        if (!res)
            throw std::runtime_error("no response from " + path);
        return std::make_pair(res->status, json::parse(res->body));
    };

    try {
        const std::string user = "visitor-1";
        const auto [s_status, session] = post("/api/session", {{"user_id", user}});
        c.expect(s_status == 200, "session status " + std::to_string(s_status));

        std::vector<std::string> kept;
        for (int i = 0; i < 100 && kept.size() < 2; ++i) {
            const auto [status, d] = post("/api/discover", {{"user_id", user}});
            c.expect(status == 200, "discover status " + std::to_string(status));
            const auto& g = d.at("ganimal");
            if (!d.at("is_new") || g.at("generation") != "G1")
                continue;
            // Keep: the first feed adopts it into the world.
            const auto [k_status, kept_energy] = post("/api/feed", {{"user_id", user}, {"ganimal_id", g.at("id")}});
            c.expect(k_status == 200, "keep status " + std::to_string(k_status));
            kept.push_back(g.at("id"));
        }
        c.expect(kept.size() == 2, "could not keep two discoveries");

        const auto [f_status, fed] = post("/api/feed", {{"user_id", user}, {"ganimal_id", kept[0]}});
        c.expect(f_status == 200 && fed.at("energy") == config.energy.initial + 2 * config.energy.feed_amount,
                 "feed response " + fed.dump());

        const auto [a_status, ack] = post("/api/annotate", {{"user_id", user},
                                                            {"ganimal_id", kept[0]},
                                                            {"ratings", {{"cute", 6}, {"memorable", 5}}},
                                                            {"morphology", {{"has_legs", true}}}});
        c.expect(a_status == 200, "annotate status " + std::to_string(a_status));

        const auto [b_status, child] = post("/api/breed", {{"user_id", user},
                                                          {"parent_a", kept[0]},
                                                          {"parent_b", kept[1]},
                                                          {"name", "Pufferdoodle"}});
        c.expect(b_status == 201, "breed status " + std::to_string(b_status));
        const auto link = child.at("permalink").get<std::string>();
        auto page = client.Get(link);
        c.expect(page && page->status == 200, "permalink GET failed");
        if (page && page->status == 200) {
            const auto body = json::parse(page->body);
            c.expect(body.at("name") == "Pufferdoodle", "name lost");
            c.expect(body.at("generation") == "G2", "not a G2");
            c.expect(body == child, "permalink payload differs from breed response");
            auto image = client.Get(body.at("image").at("uri").get<std::string>());
            c.expect(image && image->status == 200 && image->body.size() > 8, "image GET failed");
        }
        const auto board = client.Get("/api/leaderboard?user_id=" + user + "&characteristic=cute");
        c.expect(board && json::parse(board->body).at("entries")[0].at("ganimal").at("id") == kept[0],
                 "leaderboard missing the annotation");
        c.note("permalink " + link.substr(0, 19) + "...");
    } catch (...) {
        server.stop();
        thread.join();
        throw;
    }
    server.stop();
    thread.join();
}

} // namespace

int main() {
    int failures = 0;
    failures += run(1, "possibility-space counts", 1, possibility_space);
    failures += run(2, "mixture fidelity", 5, mixture_fidelity);
    failures += run(3, "dog down-sampling", 10, dog_downsampling);
    failures += run(4, "rank-proportional exploitation", 5, rank_exploitation);
    failures += run(5, "ecology dynamics and world isolation", 30, ecology_dynamics);
    failures += run(6, "statistics", 120, statistics);
    failures += run(7, "determinism and replay", 180, determinism);
    failures += run(8, "breeding algebra", 1, breeding_algebra);
    failures += run(9, "full API flow", 10, api_flow);
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";
    return failures == 0 ? 0 : 1;
}
