#pragma once

// Completion client for a remote text generator.
//
// Request:  {"prompt": str, "max_new_tokens": int, "temperature": float, "n": int[, "model": str]}
// Response: {"candidates": [str, ...]}

#include <memory>
#include <optional>
#include <string>

#include "qx/generation.hpp"
#include "qx/http_client.hpp"

namespace qx {

class HttpGenerator final : public TextGenerator {
public:
    explicit HttpGenerator(std::string endpoint_url, std::optional<std::string> api_key = env_var("QX_GENERATOR_KEY"),
                           HttpPolicy policy = {})
        : url_(std::move(endpoint_url)), key_(std::move(api_key)), policy_(policy) {}

    std::vector<std::string> complete(const std::string& prompt, const GenerationParams& params) override {
        nlohmann::json body{{"prompt", prompt},
                            {"max_new_tokens", params.max_new_tokens},
                            {"temperature", params.temperature},
                            {"n", params.n}};
        if (params.model_id) body["model"] = *params.model_id;
        const auto response = post_json(url_, body, key_, policy_, ErrorCode::generator_error);
        const auto it = response.find("candidates");
        if (it == response.end() || !it->is_array()) {
            throw Error(ErrorCode::generator_error, url_ + ": response lacks a 'candidates' array");
        }
        std::vector<std::string> out;
        for (const auto& c : *it) {
            if (!c.is_string()) throw Error(ErrorCode::generator_error, url_ + ": non-string candidate");
            out.push_back(c.get<std::string>());
        }
        return out;
    }

private:
    std::string url_;
    std::optional<std::string> key_;
    HttpPolicy policy_;
};

inline std::unique_ptr<TextGenerator> make_generator(const GeneratorConfig& config,
                                                     std::shared_ptr<const InvertedIndex> index,
                                                     HttpPolicy policy = {}) {
    config.validate();
    if (config.kind == GeneratorKind::stub) return std::make_unique<StubGenerator>(std::move(index), *config.seed);
    return std::make_unique<HttpGenerator>(*config.endpoint_url, env_var("QX_GENERATOR_KEY"), policy);
}

}  // namespace qx
