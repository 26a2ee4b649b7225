#pragma once

/// Server-wide researcher settings: retrieval pipeline and depth, prompts,
/// generator and translation hook.

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "qx/error.hpp"
#include "qx/generation.hpp"
#include "qx/retrieval.hpp"
#include "qx/scoring.hpp"
#include "qx/translation.hpp"

namespace qx {

struct Settings {
    std::string pipeline_name = "BM25";
    std::size_t k = kDefaultTopK;
    PromptTemplate qg_template = default_qbe_template();
    std::string qr_instruction = std::string(kReformulationInstruction);
    std::string feedback_instruction = std::string(kFeedbackInstruction);
    std::size_t keyword_cap = kKeywordCap;
    GeneratorConfig generator;
    TranslationHook translation;

    friend bool operator==(const Settings&, const Settings&) = default;

    void validate(const PipelineRegistry& registry) const {
        if (!registry.contains(pipeline_name)) {
            throw Error(ErrorCode::invalid_argument, "pipeline_name: '" + pipeline_name + "' is not registered");
        }
        if (k == 0) throw Error(ErrorCode::invalid_argument, "k: must be >= 1");
        if (keyword_cap == 0) throw Error(ErrorCode::invalid_argument, "keyword_cap: must be >= 1");
        qg_template.validate();
        if (is_blank(qr_instruction)) throw Error(ErrorCode::invalid_argument, "qr_instruction: must be non-empty");
        if (feedback_instruction.find(kDocumentPlaceholder) == std::string::npos) {
            throw Error(ErrorCode::invalid_argument, "feedback_instruction: must contain {document}");
        }
        generator.validate();
        translation.validate();
    }
};

inline nlohmann::ordered_json to_json(const Settings& s) {
    nlohmann::ordered_json j;
    j["pipeline_name"] = s.pipeline_name;
    j["k"] = s.k;
    j["qg_template"] = to_json(s.qg_template);
    j["qr_instruction"] = s.qr_instruction;
    j["feedback_instruction"] = s.feedback_instruction;
    j["keyword_cap"] = s.keyword_cap;
    j["generator"] = to_json(s.generator);
    j["translation"] = to_json(s.translation);
    return j;
}

/// Applies a partial settings object on top of `base`. Unknown keys and
/// invalid values are rejected with the offending field named; `base` is
/// never modified.
inline Settings apply_settings_patch(const Settings& base, const nlohmann::json& patch,
                                     const PipelineRegistry& registry) {
    if (!patch.is_object()) throw Error(ErrorCode::invalid_argument, "settings must be a JSON object");
    Settings next = base;
    const auto text = [&](const char* key) {
        const auto& v = patch.at(key);
        if (!v.is_string()) throw Error(ErrorCode::invalid_argument, std::string(key) + ": must be a string");
        return v.get<std::string>();
    };
    const auto count = [&](const char* key) {
        const auto& v = patch.at(key);
        if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
            throw Error(ErrorCode::invalid_argument, std::string(key) + ": must be an integer >= 1");
        }
        return v.get<std::size_t>();
    };
    for (const auto& [key, value] : patch.items()) {
        if (key == "pipeline_name") {
            next.pipeline_name = text("pipeline_name");
        } else if (key == "k") {
            next.k = count("k");
        } else if (key == "keyword_cap") {
            next.keyword_cap = count("keyword_cap");
        } else if (key == "qr_instruction") {
            next.qr_instruction = text("qr_instruction");
        } else if (key == "feedback_instruction") {
            next.feedback_instruction = text("feedback_instruction");
        } else if (key == "qg_template") {
            next.qg_template = prompt_template_from_json(value, next.qg_template);
        } else if (key == "generator") {
            next.generator = generator_config_from_json(value, next.generator);
        } else if (key == "translation") {
            next.translation = translation_hook_from_json(value, next.translation);
        } else {
            throw Error(ErrorCode::invalid_argument, key + ": unknown settings field");
        }
    }
    next.validate(registry);
    return next;
}

inline Settings load_settings_file(const std::filesystem::path& path, const PipelineRegistry& registry,
                                   const Settings& base = {}) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open settings file " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::parse_error, path.string() + ": " + e.what());
    }
    return apply_settings_patch(base, j, registry);
}

}  // namespace qx
