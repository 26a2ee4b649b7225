#pragma once

/// The searcher/researcher API, independent of transport. Service exposes
/// typed operations; handle() maps (method, path, JSON body) requests onto
/// them and renders responses and errors as JSON.
///
/// Errors render as {"error": <code>, "detail": <message>} with status
/// 400 invalid input, 404 unknown session/doc/pipeline/log, 500 storage,
/// 502 generator.

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qx/error.hpp"
#include "qx/generation.hpp"
#include "qx/generator_http.hpp"
#include "qx/index.hpp"
#include "qx/reformulation.hpp"
#include "qx/retrieval.hpp"
#include "qx/scoring.hpp"
#include "qx/session_log.hpp"
#include "qx/settings.hpp"
#include "qx/translation.hpp"

namespace qx {

struct ApiResponse {
    int status = 200;
    nlohmann::ordered_json body;
};

struct RetrievalResponse {
    std::vector<ScoredDoc> results;
    std::vector<std::string> warnings;
};

inline int http_status_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_argument:
        case ErrorCode::parse_error:
        case ErrorCode::duplicate: return 400;
        case ErrorCode::not_found:
        case ErrorCode::unknown_pipeline: return 404;
        case ErrorCode::generator_error: return 502;
        case ErrorCode::io_error: return 500;
    }
    return 500;
}

inline ApiResponse error_response(int status, std::string_view error, std::string_view detail) {
    nlohmann::ordered_json body;
    body["error"] = error;
    body["detail"] = detail;
    return {status, std::move(body)};
}

class Service {
public:
    using GeneratorFactory = std::function<std::unique_ptr<TextGenerator>(const GeneratorConfig&)>;

    Service(std::shared_ptr<const InvertedIndex> index, std::shared_ptr<PipelineRegistry> registry,
            std::shared_ptr<SessionLog> log, Settings initial = {}, GeneratorFactory factory = {})
        : index_(std::move(index)), registry_(std::move(registry)), log_(std::move(log)),
          factory_(std::move(factory)) {
        if (!index_ || !registry_ || !log_) throw Error(ErrorCode::invalid_argument, "service needs index, registry and log");
        if (!factory_) {
            factory_ = [idx = index_](const GeneratorConfig& c) { return make_generator(c, idx); };
        }
        initial.validate(*registry_);
        settings_ = std::make_shared<const Settings>(std::move(initial));
    }

    const InvertedIndex& index() const noexcept { return *index_; }
    PipelineRegistry& registry() noexcept { return *registry_; }
    SessionLog& log() noexcept { return *log_; }

    /// Coherent snapshot; later updates never mutate it.
    std::shared_ptr<const Settings> settings() const {
        std::lock_guard lock(settings_mutex_);
        return settings_;
    }

    Settings update_settings(const nlohmann::json& patch) {
        std::lock_guard lock(settings_mutex_);
        auto next = std::make_shared<const Settings>(apply_settings_patch(*settings_, patch, *registry_));
        settings_ = next;
        return *next;
    }

    Session create_session() { return log_->new_session(); }

    std::vector<GeneratedQuery> generate(const std::string& session_id, const std::string& example_document) {
        const auto session = require_session(session_id);
        const auto s = settings();
        const auto prompt = build_qbe_prompt(example_document, s->qg_template);
        auto generator = factory_(s->generator);
        return query_generator(*generator, prompt, s->generator, *log_, session);
    }

    /// Records a searcher edit when `query` differs from the session's last
    /// query. Returns whether an event was written.
    bool edit(const std::string& session_id, const std::string& query) {
        const auto session = require_session(session_id);
        if (is_blank(query)) throw Error(ErrorCode::invalid_argument, "query must be non-empty");
        return record_edit_if_changed(session, query);
    }

    ReformulationResult reformulate(const std::string& session_id, const std::string& query) {
        const auto session = require_session(session_id);
        if (is_blank(query)) throw Error(ErrorCode::invalid_argument, "query must be non-empty");
        const auto s = settings();
        auto generator = factory_(s->generator);
        // The box content may have been edited since the last recorded query.
        record_edit_if_changed(session, query);
        return append_keywords({session, query, {}, s->generator}, s->qr_instruction, *generator, *log_,
                               {s->keyword_cap, s->qg_template.doc_char_budget});
    }

    ReformulationResult feedback(const std::string& session_id, const std::string& query,
                                 const std::vector<std::string>& docnos) {
        const auto session = require_session(session_id);
        if (is_blank(query)) throw Error(ErrorCode::invalid_argument, "query must be non-empty");
        if (docnos.empty()) throw Error(ErrorCode::invalid_argument, "docnos must be non-empty");
        for (const auto& d : docnos) {
            if (!index_->contains(d)) throw Error(ErrorCode::not_found, "unknown docno '" + d + "'");
        }
        const auto s = settings();
        auto generator = factory_(s->generator);
        record_edit_if_changed(session, query);
        return send_feedback({session, query, docnos, s->generator}, s->feedback_instruction, *index_, *generator,
                             *log_, {s->keyword_cap, s->qg_template.doc_char_budget});
    }

    RetrievalResponse retrieve(const std::string& session_id, const std::string& query) {
        const auto session = require_session(session_id);
        if (is_blank(query)) throw Error(ErrorCode::invalid_argument, "query must be non-empty");
        const auto s = settings();
        RetrievalResponse out;
        out.results = qx::retrieve(*index_, query, *registry_, s->pipeline_name, s->k);

        if (s->translation.kind != TranslationKind::identity) {
            std::vector<std::string> texts;
            texts.reserve(out.results.size());
            for (const auto& r : out.results) texts.push_back(r.text);
            auto translated = translate(texts, s->translation.src, s->translation.tgt, s->translation);
            for (std::size_t i = 0; i < out.results.size(); ++i) {
                out.results[i].translated_text = std::move(translated.texts[i]);
            }
            out.warnings = std::move(translated.warnings);
        }

        record_edit_if_changed(session, query);
        log_->record_results(session, query, s->pipeline_name, out.results);
        return out;
    }

    AnnotationRecord annotate(const std::string& session_id, const std::string& query, const std::string& docno,
                              int grade) {
        const auto session = require_session(session_id);
        if (is_blank(query)) throw Error(ErrorCode::invalid_argument, "query must be non-empty");
        if (grade < kMinGrade || grade > kMaxGrade) {
            throw Error(ErrorCode::invalid_argument, "grade must be an integer in [0,3]");
        }
        if (!index_->contains(docno)) throw Error(ErrorCode::not_found, "unknown docno '" + docno + "'");
        return log_->record_annotation(session, query, docno, grade);
    }

    std::vector<nlohmann::ordered_json> logs(std::string_view name) const {
        const auto stream = log_stream_from_string(name);
        if (!stream) throw Error(ErrorCode::not_found, "unknown log '" + std::string(name) + "'");
        return log_->read_log(*stream);
    }

    ApiResponse handle(std::string_view method, std::string_view path, std::string_view body_text) {
        try {
            return dispatch(method, path, body_text);
        } catch (const Error& e) {
            return error_response(http_status_for(e.code()), to_string(e.code()), e.what());
        } catch (const nlohmann::json::exception& e) {
            return error_response(400, "invalid_argument", e.what());
        } catch (const std::exception& e) {
            return error_response(500, "internal", e.what());
        }
    }

private:
    using ojson = nlohmann::ordered_json;

    Session require_session(const std::string& session_id) const {
        if (session_id.empty()) throw Error(ErrorCode::invalid_argument, "session_id is required");
        if (!log_->has_session(session_id)) throw Error(ErrorCode::not_found, "unknown session '" + session_id + "'");
        return {session_id, 0};
    }

    bool record_edit_if_changed(const Session& session, const std::string& query) {
        const auto last = log_->last_query(session.session_id);
        if (last && *last == query) return false;
        log_->on_query_change(session, kUserEditsLog, last, query, QuerySource::user_edit);
        return true;
    }

    static nlohmann::json parse_body(std::string_view text) {
        if (trim(text).empty()) return nlohmann::json::object();
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorCode::invalid_argument, std::string("request body is not valid JSON: ") + e.what());
        }
        if (!j.is_object()) throw Error(ErrorCode::invalid_argument, "request body must be a JSON object");
        return j;
    }

    static std::string string_arg(const nlohmann::json& body, const char* key) {
        const auto it = body.find(key);
        if (it == body.end()) throw Error(ErrorCode::invalid_argument, std::string("missing field '") + key + "'");
        if (!it->is_string()) throw Error(ErrorCode::invalid_argument, std::string("field '") + key + "' must be a string");
        return it->get<std::string>();
    }

    ApiResponse dispatch(std::string_view method, std::string_view path, std::string_view body_text) {
        if (method == "POST" && path == "/api/session") {
            const auto session = create_session();
            ojson out;
            out["session_id"] = session.session_id;
            return {200, out};
        }
        if (method == "POST" && path == "/api/generate") {
            const auto body = parse_body(body_text);
            const auto candidates = generate(string_arg(body, "session_id"), string_arg(body, "example_document"));
            ojson out;
            auto& arr = out["candidates"] = ojson::array();
            for (const auto& c : candidates) {
                ojson item;
                item["text"] = c.text;
                item["source"] = to_string(c.source);
                arr.push_back(std::move(item));
            }
            return {200, out};
        }
        if (method == "POST" && path == "/api/edit") {
            const auto body = parse_body(body_text);
            const auto query = string_arg(body, "query");
            const bool recorded = edit(string_arg(body, "session_id"), query);
            ojson out;
            out["query"] = query;
            out["recorded"] = recorded;
            return {200, out};
        }
        if (method == "POST" && path == "/api/reformulate") {
            const auto body = parse_body(body_text);
            const auto result = reformulate(string_arg(body, "session_id"), string_arg(body, "query"));
            ojson out;
            out["query"] = result.query;
            return {200, out};
        }
        if (method == "POST" && path == "/api/feedback") {
            const auto body = parse_body(body_text);
            const auto it = body.find("docnos");
            if (it == body.end() || !it->is_array()) {
                throw Error(ErrorCode::invalid_argument, "field 'docnos' must be an array of strings");
            }
            std::vector<std::string> docnos;
            for (const auto& d : *it) {
                if (!d.is_string()) throw Error(ErrorCode::invalid_argument, "field 'docnos' must contain strings");
                docnos.push_back(d.get<std::string>());
            }
            const auto result = feedback(string_arg(body, "session_id"), string_arg(body, "query"), docnos);
            ojson out;
            out["query"] = result.query;
            return {200, out};
        }
        if (method == "POST" && path == "/api/retrieve") {
            const auto body = parse_body(body_text);
            const auto response = retrieve(string_arg(body, "session_id"), string_arg(body, "query"));
            ojson out;
            auto& arr = out["results"] = ojson::array();
            for (const auto& r : response.results) {
                ojson item;
                item["docno"] = r.docno;
                item["rank"] = r.rank;
                item["score"] = r.score;
                item["text"] = r.text;
                item["translated_text"] = r.translated_text ? ojson(*r.translated_text) : ojson(nullptr);
                arr.push_back(std::move(item));
            }
            if (!response.warnings.empty()) out["warnings"] = response.warnings;
            return {200, out};
        }
        if (method == "POST" && path == "/api/annotate") {
            const auto body = parse_body(body_text);
            const auto it = body.find("grade");
            if (it == body.end() || !it->is_number_integer()) {
                throw Error(ErrorCode::invalid_argument, "field 'grade' must be an integer in [0,3]");
            }
            const auto grade = it->get<std::int64_t>();
            if (grade < kMinGrade || grade > kMaxGrade) {
                throw Error(ErrorCode::invalid_argument, "grade must be an integer in [0,3]");
            }
            annotate(string_arg(body, "session_id"), string_arg(body, "query"), string_arg(body, "docno"),
                     static_cast<int>(grade));
            return {200, ojson::object()};
        }
        if (path == "/api/settings") {
            if (method == "GET") return {200, to_json(*settings())};
            if (method == "PUT") return {200, to_json(update_settings(parse_body(body_text)))};
        }
        if (method == "GET" && path == "/api/pipelines") {
            ojson out;
            auto& arr = out["pipelines"] = ojson::array();
            for (const auto& [name, description] : registry_->descriptions()) {
                ojson item;
                item["name"] = name;
                item["description"] = description;
                arr.push_back(std::move(item));
            }
            return {200, out};
        }
        constexpr std::string_view logs_prefix = "/api/logs/";
        if (method == "GET" && path.substr(0, logs_prefix.size()) == logs_prefix) {
            const auto records = logs(path.substr(logs_prefix.size()));
            return {200, ojson(records)};
        }
        constexpr std::string_view lineage_prefix = "/api/lineage/";
        if (method == "GET" && path.substr(0, lineage_prefix.size()) == lineage_prefix) {
            ojson out = ojson::array();
            for (const auto& entry : log_->lineage(std::string(path.substr(lineage_prefix.size())))) {
                ojson item = to_json(entry.event);
                item["link"] = to_string(entry.status);
                out.push_back(std::move(item));
            }
            return {200, out};
        }
        return error_response(404, "not_found", "no route for " + std::string(method) + " " + std::string(path));
    }

    std::shared_ptr<const InvertedIndex> index_;
    std::shared_ptr<PipelineRegistry> registry_;
    std::shared_ptr<SessionLog> log_;
    GeneratorFactory factory_;
    mutable std::mutex settings_mutex_;
    std::shared_ptr<const Settings> settings_;
};

}  // namespace qx
