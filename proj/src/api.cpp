#include "ganimals/api.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>

namespace ganimals {

using nlohmann::json;

int http_status(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::UnknownGanimal:
    case ErrorCode::NotInWorld: return 404;
    case ErrorCode::CrossWorld: return 403;
    case ErrorCode::IdenticalParents:
    case ErrorCode::InsufficientData:
    case ErrorCode::AlreadyNamed:
    case ErrorCode::SameCategory:
    case ErrorCode::EmptyLeaderboard: return 409;
    case ErrorCode::WrongGeneration: return 422;
    case ErrorCode::BackendUnavailable: return 503;
    case ErrorCode::RenderRejected: return 502;
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidMix:
    case ErrorCode::PreconditionViolation: return 500;
    default: return 400;
    }
}

namespace {

ApiResponse ok(const json& body, int status = 200) {
    return {status, "application/json", body.dump()};
}

ApiResponse error_response(int status, std::string_view code, const std::string& message) {
    return ok(json{{"error", code}, {"message", message}}, status);
}

json parse_body(const std::string& body) {
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        fail(ErrorCode::BadRequest, "request body must be a JSON object");
    return j;
}

std::string string_field(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_string())
        fail(ErrorCode::BadRequest, std::string("missing string field '") + key + "'");
    return j.at(key).get<std::string>();
}

GanimalId id_field(const json& j, const char* key) {
    const auto text = string_field(j, key);
    try {
        return GanimalId::from_hex(text);
    } catch (const Error&) {
        fail(ErrorCode::BadRequest, std::string("field '") + key + "' is not a ganimal id");
    }
}

std::string query_param(const std::map<std::string, std::string>& query, const std::string& key) {
    auto it = query.find(key);
    if (it == query.end() || it->second.empty())
        fail(ErrorCode::BadRequest, "missing query parameter '" + key + "'");
    return it->second;
}

/// Ids in a path that don't parse are simply not found.
GanimalId path_id(std::string_view text) {
    try {
        return GanimalId::from_hex(text);
    } catch (const Error&) {
        fail(ErrorCode::UnknownGanimal, "no ganimal " + std::string(text));
    }
}

json ack_json(const AnnotationAck& ack) {
    json metrics = json::array();
    for (auto m : ack.metrics)
        metrics.push_back(to_string(m));
    json features = json::array();
    for (auto f : ack.features)
        features.push_back(to_string(f));
    return json{{"ganimal_id", ack.ganimal_id.hex()}, {"metrics", metrics}, {"features", features}};
}

bool starts_with(std::string_view s, std::string_view prefix) {
    return s.substr(0, prefix.size()) == prefix;
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

} // namespace

ApiResponse Api::handle(const std::string& method, const std::string& path,
                        const std::map<std::string, std::string>& query, const std::string& body) {
    try {
        return route(method, path, query, body);
    } catch (const Error& e) {
        return error_response(http_status(e.code()), to_string(e.code()), e.what());
    } catch (const json::exception& e) {
        return error_response(400, "BadRequest", e.what());
    } catch (const std::exception& e) {
        return error_response(500, "InternalError", e.what());
    }
}

ApiResponse Api::route(const std::string& method, const std::string& path,
                       const std::map<std::string, std::string>& query, const std::string& body) {
    if (method == "GET") {
        if (path == "/healthz")
            return ok({{"status", "ok"}, {"worlds", platform_.config().n_worlds}});
        if (path == "/api/world")
            return ok(platform_.world_view(query_param(query, "user_id")));
        if (path == "/api/leaderboard")
            return ok(platform_.leaderboard_view(query_param(query, "user_id"),
                                                 parse_characteristic(query_param(query, "characteristic"))));
        if (path == "/api/stats") {
            const Metric metric = parse_metric(query_param(query, "metric"));
            return ok(to_json(platform_.stats(metric, query_param(query, "predicate"))));
        }
        if (starts_with(path, "/g/") && path.find('/', 3) == std::string::npos) {
            const auto ganimal = platform_.ganimal(path_id(std::string_view(path).substr(3)));
            return ok(to_json(ganimal));
        }
        if (starts_with(path, "/images/") && ends_with(path, ".png")) {
            const auto hex = std::string_view(path).substr(8, path.size() - 8 - 4);
            std::optional<std::vector<std::uint8_t>> bytes;
            try {
                bytes = platform_.images().get(Digest256::from_hex(hex));
            } catch (const Error&) {
            }
            if (!bytes)
                return error_response(404, "NotFound", "no image " + std::string(hex));
            return {200, "image/png", std::string(bytes->begin(), bytes->end())};
        }
    } else if (method == "POST") {
        if (path == "/api/session") {
            const auto user = string_field(parse_body(body), "user_id");
            const WorldId w = platform_.assign(user);
            json view;
            platform_.inspect([&](const PlatformState& s) { view = to_string(s.worlds.at(w).layout()); });
            return ok({{"user_id", user}, {"world_id", w}, {"layout_variant", view}});
        }
        if (path == "/api/discover") {
            const auto d = platform_.discover(string_field(parse_body(body), "user_id"));
            return ok({{"ganimal", to_json(d.ganimal)},
                       {"world_id", d.world},
                       {"procedure", to_string(d.procedure)},
                       {"characteristic", d.characteristic ? json(to_string(*d.characteristic)) : json(nullptr)},
                       {"is_new", d.is_new}});
        }
        if (path == "/api/breed") {
            const json j = parse_body(body);
            std::optional<std::string> name;
            if (j.contains("name") && !j.at("name").is_null())
                name = string_field(j, "name");
            const auto g = platform_.breed(string_field(j, "user_id"), id_field(j, "parent_a"),
                                           id_field(j, "parent_b"), name);
            return ok(to_json(g), 201);
        }
        if (path == "/api/feed") {
            const json j = parse_body(body);
            const auto id = id_field(j, "ganimal_id");
            const auto user = string_field(j, "user_id");
            const auto energy = platform_.feed(user, id);
            return ok({{"ganimal_id", id.hex()},
                       {"world_id", *platform_.world_of(user)},
                       {"energy", energy.energy},
                       {"last_fed_tick", energy.last_fed_tick}});
        }
        if (path == "/api/annotate") {
            const json j = parse_body(body);
            const auto user = string_field(j, "user_id");
            id_field(j, "ganimal_id");
            auto record = annotation_from_json(j);
            return ok(ack_json(platform_.annotate(user, std::move(record))));
        }
        if (starts_with(path, "/g/") && ends_with(path, "/name")) {
            const auto id = path_id(std::string_view(path).substr(3, path.size() - 3 - 5));
            const json j = parse_body(body);
            return ok(to_json(platform_.name_ganimal(string_field(j, "user_id"), id, string_field(j, "name"))));
        }
    }
    return error_response(404, "NotFound", method + " " + path);
}

void Api::mount(httplib::Server& server) {
    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
        std::map<std::string, std::string> query;
        for (const auto& [k, v] : req.params)
            query.emplace(k, v);
        auto out = handle(req.method, req.path, query, req.body);
        res.status = out.status;
        res.set_content(std::move(out.body), out.content_type);
    };
    server.Get(R"(/.*)", forward);
    server.Post(R"(/.*)", forward);
}

} // namespace ganimals
