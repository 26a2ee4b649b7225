#pragma once

#include <chrono>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "qx/error.hpp"

namespace qx {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;    // begins with '/'
};

inline SplitUrl split_url(std::string_view url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos) {
        throw Error(ErrorCode::invalid_argument, "URL needs a scheme: " + std::string(url));
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string_view::npos) return {std::string(url), "/"};
    return {std::string(url.substr(0, path_start)), std::string(url.substr(path_start))};
}

inline std::optional<std::string> env_var(const char* name) {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
}

struct HttpPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds connect_timeout{2000};
    std::chrono::milliseconds read_timeout{30000};
    std::chrono::milliseconds backoff{100};
};

/// POSTs a JSON body, retrying transport failures and 5xx responses.
/// Throws `failure_code` with the last failure once attempts are exhausted.
inline nlohmann::json post_json(const std::string& url, const nlohmann::json& body,
                                const std::optional<std::string>& bearer, const HttpPolicy& policy,
                                ErrorCode failure_code) {
    const auto target = split_url(url);
    httplib::Client client(target.origin);
    if (!client.is_valid()) throw Error(failure_code, "unsupported endpoint URL: " + url);
    client.set_connection_timeout(policy.connect_timeout);
    client.set_read_timeout(policy.read_timeout);
    httplib::Headers headers;
    if (bearer) headers.emplace("Authorization", "Bearer " + *bearer);

    const auto payload = body.dump();
    std::string last_failure = "no attempt made";
    const int attempts = policy.max_attempts < 1 ? 1 : policy.max_attempts;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        if (attempt > 1) std::this_thread::sleep_for(policy.backoff * (attempt - 1));
        const auto res = client.Post(target.path, headers, payload, "application/json");
        if (!res) {
            last_failure = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_failure = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw Error(failure_code, url + " answered HTTP " + std::to_string(res->status) + ": " + res->body);
        }
        try {
            return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(failure_code, url + " returned invalid JSON: " + e.what());
        }
    }
    throw Error(failure_code, url + ": retries exhausted after " + std::to_string(attempts) +
                                  " attempts; last failure: " + last_failure);
}

}  // namespace qx
