#include <atomic>
#include <chrono>
#include <condition_variable>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <httplib.h>

#include "ganimals/api.hpp"
#include "ganimals/config.hpp"
#include "ganimals/platform.hpp"
#include "ganimals/simulate.hpp"

using namespace ganimals;

namespace {

ServiceConfig read_config(const std::string& path) {
    ServiceConfig config = path.empty() ? ServiceConfig{} : load_config(path);
    apply_env_overrides(config, process_env());
    config.validate();
    return config;
}

std::unique_ptr<GeneratorBackend> make_backend(const ServiceConfig& config) {
    if (config.backend.mode == "http")
        return std::make_unique<HttpBackend>(config.backend.url, std::chrono::milliseconds(config.backend.timeout_ms));
    return std::make_unique<MockBackend>();
}

int serve(const std::string& config_path) {
    const auto config = read_config(config_path);
    auto backend = make_backend(config);
    Platform platform(config, load_taxonomy_for(config), *backend);
    Api api(platform);
    httplib::Server server;
    api.mount(server);

    std::mutex mu;
    std::condition_variable cv;
    bool stopping = false;
    std::thread ticker([&] {
        std::unique_lock lock(mu);
        while (!cv.wait_for(lock, std::chrono::seconds(config.tick_seconds), [&] { return stopping; })) {
            lock.unlock();
            platform.tick_all();
            lock.lock();
        }
    });

    std::cerr << "listening on " << config.host << ":" << config.port << " with " << config.n_worlds
              << " worlds\n";
    const bool ok = server.listen(config.host, config.port);
    {
        std::lock_guard lock(mu);
        stopping = true;
    }
    cv.notify_all();
    ticker.join();
    if (!ok) {
        std::cerr << "failed to listen on " << config.host << ":" << config.port << "\n";
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ganimals engine and service"};
    app.require_subcommand(1);

    std::string config_path;

    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
    serve_cmd->add_option("--config", config_path, "ServiceConfig JSON file");

    SimulationOptions sim;
    std::string out_path;
    std::string profiles;
    auto* sim_cmd = app.add_subcommand("simulate", "Drive synthetic users and write a report");
    sim_cmd->add_option("--config", config_path, "ServiceConfig JSON file");
    sim_cmd->add_option("--users", sim.n_users, "Number of synthetic users")->capture_default_str();
    sim_cmd->add_option("--steps", sim.n_steps, "Steps per user")->capture_default_str();
    sim_cmd->add_option("--seed", sim.seed, "Seed for every random choice")->capture_default_str();
    sim_cmd->add_option("--profiles", profiles, "Comma-separated profile per world (uniform, dog_lover, insect_lover)");
    sim_cmd->add_option("--resolution", sim.resolution, "Mock render resolution")->capture_default_str();
    sim_cmd->add_option("--data-dir", sim.data_dir, "Persist the simulated event log here");
    sim_cmd->add_option("--out", out_path, "Report path (stdout when omitted)");

    std::string metric = "cute";
    std::string predicate = "contains_dog";
    auto* stats_cmd = app.add_subcommand("stats", "Group comparison over a service's event log");
    stats_cmd->add_option("--config", config_path, "ServiceConfig JSON file");
    stats_cmd->add_option("--metric", metric)->capture_default_str();
    stats_cmd->add_option("--predicate", predicate)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*serve_cmd)
            return serve(config_path);
        if (*sim_cmd) {
            const auto config = read_config(config_path);
            std::stringstream ss(profiles);
            for (std::string p; std::getline(ss, p, ',');)
                if (!p.empty())
                    sim.world_profiles.push_back(p);
            const auto result = run_simulation(config, load_taxonomy_for(config), sim);
            const auto text = result.report.dump(2) + "\n";
            if (out_path.empty()) {
                std::cout << text;
            } else {
                std::ofstream out(out_path, std::ios::binary);
                out << text;
                if (!out) {
                    std::cerr << "failed to write " << out_path << "\n";
                    return 1;
                }
            }
            return 0;
        }
        if (*stats_cmd) {
            const auto config = read_config(config_path);
            MockBackend backend;
            const Metric m = parse_metric(metric);
            Platform platform(config, load_taxonomy_for(config), backend);
            std::cout << to_json(platform.stats(m, predicate)).dump(2) << "\n";
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
