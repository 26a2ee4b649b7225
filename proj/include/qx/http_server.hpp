#pragma once

#include <filesystem>
#include <string>

#include "httplib.h"
#include "qx/service.hpp"

namespace qx {

/// Routes every /api/... request through Service::handle. When `static_dir`
/// is given it is served under "/".
inline void mount_api(httplib::Server& server, Service& service, const std::filesystem::path& static_dir = {}) {
    const auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
        const auto response = service.handle(req.method, req.path, req.body);
        res.status = response.status;
        res.set_content(response.body.dump(), "application/json");
    };
    server.Post(R"(/api/.*)", forward);
    server.Get(R"(/api/.*)", forward);
    server.Put(R"(/api/.*)", forward);
    if (!static_dir.empty()) server.set_mount_point("/", static_dir.string());
}

}  // namespace qx
