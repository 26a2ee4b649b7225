#pragma once

/// Display translation for retrieved text. The identity hook passes text
/// through; the HTTP hook posts {texts, src, tgt} and expects {texts}.
/// Translation never fails a request: items that cannot be translated come
/// back as their source text and a warning is added.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qx/error.hpp"
#include "qx/http_client.hpp"

namespace qx {

enum class TranslationKind { identity, http_endpoint };

struct TranslationHook {
    TranslationKind kind = TranslationKind::identity;
    std::optional<std::string> endpoint_url;
    std::string src = "eng";
    std::string tgt = "eng";

    friend bool operator==(const TranslationHook&, const TranslationHook&) = default;

    void validate() const {
        if (kind == TranslationKind::http_endpoint && (!endpoint_url || endpoint_url->empty())) {
            throw Error(ErrorCode::invalid_argument, "http translation hook requires endpoint_url");
        }
        if (src.empty() || tgt.empty()) throw Error(ErrorCode::invalid_argument, "translation languages must be set");
    }
};

struct TranslationOutput {
    std::vector<std::string> texts;
    std::vector<std::string> warnings;
};

inline TranslationOutput translate(const std::vector<std::string>& texts, const std::string& src,
                                   const std::string& tgt, const TranslationHook& hook, HttpPolicy policy = {}) {
    if (texts.empty() || src == tgt || hook.kind == TranslationKind::identity) return {texts, {}};

    TranslationOutput out{texts, {}};
    nlohmann::json response;
    try {
        response = post_json(*hook.endpoint_url, {{"texts", texts}, {"src", src}, {"tgt", tgt}}, std::nullopt, policy,
                             ErrorCode::io_error);
    } catch (const Error& e) {
        for (std::size_t i = 0; i < texts.size(); ++i) {
            out.warnings.push_back("item " + std::to_string(i) + ": translation unavailable (" + e.what() + ")");
        }
        return out;
    }

    const auto it = response.find("texts");
    const bool usable = it != response.end() && it->is_array() && it->size() == texts.size();
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (usable && (*it)[i].is_string()) {
            out.texts[i] = (*it)[i].get<std::string>();
        } else {
            out.warnings.push_back("item " + std::to_string(i) + ": malformed translation response; source kept");
        }
    }
    return out;
}

inline nlohmann::ordered_json to_json(const TranslationHook& h) {
    nlohmann::ordered_json j;
    j["kind"] = h.kind == TranslationKind::identity ? "identity" : "http";
    j["endpoint_url"] = h.endpoint_url ? nlohmann::ordered_json(*h.endpoint_url) : nlohmann::ordered_json(nullptr);
    j["src"] = h.src;
    j["tgt"] = h.tgt;
    return j;
}

inline TranslationHook translation_hook_from_json(const nlohmann::json& j, TranslationHook base = {}) {
    if (!j.is_object()) throw Error(ErrorCode::invalid_argument, "translation must be an object");
    try {
        if (j.contains("kind")) {
            const auto kind = j.at("kind").get<std::string>();
            if (kind == "identity") {
                base.kind = TranslationKind::identity;
            } else if (kind == "http" || kind == "http_endpoint") {
                base.kind = TranslationKind::http_endpoint;
            } else {
                throw Error(ErrorCode::invalid_argument, "unknown translation kind '" + kind + "'");
            }
        }
        if (j.contains("endpoint_url")) {
            base.endpoint_url =
                j.at("endpoint_url").is_null() ? std::nullopt : std::optional(j.at("endpoint_url").get<std::string>());
        }
        if (j.contains("src")) base.src = j.at("src").get<std::string>();
        if (j.contains("tgt")) base.tgt = j.at("tgt").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::invalid_argument, std::string("translation: ") + e.what());
    }
    base.validate();
    return base;
}

}  // namespace qx
