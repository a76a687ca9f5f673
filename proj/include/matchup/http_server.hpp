#pragma once

// Binds SessionService to an httplib server and optionally serves a static
// UI bundle from a directory.

#include <filesystem>
#include <string>

#include <httplib.h>

#include "matchup/session.hpp"

namespace matchup {

inline void install_routes(httplib::Server& server, SessionService& service,
                           const std::filesystem::path& static_dir = {}) {
  auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
    ApiResponse r = service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(-1, ' ', false), "application/json; charset=utf-8");
  };
  server.Get(R"(/api/.*)", forward);
  server.Post(R"(/api/.*)", forward);
  if (!static_dir.empty() && std::filesystem::is_directory(static_dir)) {
    server.set_mount_point("/", static_dir.string());
  }
}

} // namespace matchup
