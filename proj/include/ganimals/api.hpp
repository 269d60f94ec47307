#pragma once

#include <map>
#include <string>

#include "ganimals/error.hpp"
#include "ganimals/platform.hpp"

namespace httplib {
class Server;
}

namespace ganimals {

struct ApiResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

int http_status(ErrorCode code) noexcept;

/// Routes the JSON API onto a Platform. `handle` is transport-free so tests
/// can drive it directly; `mount` wires the same routes into an httplib server.
///
///   POST /api/session       {user_id}
///   POST /api/discover      {user_id}
///   POST /api/breed         {user_id, parent_a, parent_b, name?}
///   POST /api/feed          {user_id, ganimal_id}
///   POST /api/annotate      {user_id, ganimal_id, morphology?, ratings?}
///   POST /g/{id}/name       {user_id, name}
///   GET  /api/world         ?user_id=
///   GET  /api/leaderboard   ?user_id=&characteristic=
///   GET  /api/stats         ?metric=&predicate=
///   GET  /g/{id}
///   GET  /images/{digest}.png
///   GET  /healthz
class Api {
public:
    explicit Api(Platform& platform) : platform_(platform) {}

    ApiResponse handle(const std::string& method, const std::string& path,
                       const std::map<std::string, std::string>& query, const std::string& body);

    void mount(httplib::Server& server);

private:
    ApiResponse route(const std::string& method, const std::string& path,
                      const std::map<std::string, std::string>& query, const std::string& body);

    Platform& platform_;
};

} // namespace ganimals
