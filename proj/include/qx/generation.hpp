#pragma once

/// Prompt construction for query generation and keyword expansion, the
/// text-generator interface, the deterministic offline stub, and candidate
/// post-processing.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qx/error.hpp"
#include "qx/index.hpp"
#include "qx/scoring.hpp"
#include "qx/session_log.hpp"
#include "qx/text.hpp"

namespace qx {

inline constexpr std::size_t kDefaultDocCharBudget = 4000;
inline constexpr std::size_t kDefaultNumCandidates = 3;
inline constexpr std::size_t kKeywordCap = 10;

inline constexpr std::string_view kQbeInstruction = "Generate a query given the following document";
inline constexpr std::string_view kReformulationInstruction =
    "Improve the search effectiveness by suggesting expansion terms for the query";
inline constexpr std::string_view kFeedbackInstruction =
    "Based on the given context ```{document}```, generate keywords for the query";
inline constexpr std::string_view kDocumentPlaceholder = "{document}";

struct Exemplar {
    std::string document;
    std::string query;

    friend bool operator==(const Exemplar&, const Exemplar&) = default;
};

struct PromptTemplate {
    std::string instruction;
    std::vector<Exemplar> exemplars;
    std::size_t doc_char_budget = kDefaultDocCharBudget;  // code points

    friend bool operator==(const PromptTemplate&, const PromptTemplate&) = default;

    void validate() const {
        if (is_blank(instruction)) throw Error(ErrorCode::invalid_argument, "prompt instruction must be non-empty");
        if (doc_char_budget == 0) throw Error(ErrorCode::invalid_argument, "doc_char_budget must be >= 1");
        for (std::size_t i = 0; i < exemplars.size(); ++i) {
            if (is_blank(exemplars[i].document) || is_blank(exemplars[i].query)) {
                throw Error(ErrorCode::invalid_argument,
                            "exemplar " + std::to_string(i + 1) + " needs a non-empty document and query");
            }
        }
    }
};

/// Three passage/query pairs in the style of web-search QA data. Replace them
/// through the settings file or PUT /api/settings.
inline std::vector<Exemplar> default_exemplars() {
    return {
        {"The Great Barrier Reef, off the coast of Queensland, Australia, is the largest coral reef system in the "
         "world. It is made up of nearly 3,000 individual reefs and 900 islands stretching over 2,300 kilometres.",
         "how big is the great barrier reef"},
        {"Vitamin D helps the body absorb calcium and phosphorus. The skin produces it when exposed to sunlight, "
         "and it is also found in fatty fish, egg yolks and fortified foods such as milk.",
         "what does vitamin d do for the body"},
        {"A mortgage broker acts as an intermediary between borrowers and lenders. Brokers compare loan offers "
         "from several banks and are usually paid a commission by the lender when the loan closes.",
         "what does a mortgage broker do"},
    };
}

inline PromptTemplate default_qbe_template() {
    return {std::string(kQbeInstruction), default_exemplars(), kDefaultDocCharBudget};
}

/// instruction, blank line, each exemplar as "Document: ...\nQuery: ...\n\n",
/// then "Document: <input>\nQuery:".
inline std::string render_prompt(const PromptTemplate& tmpl, std::string_view input) {
    std::string out = tmpl.instruction;
    out += "\n\n";
    for (const auto& ex : tmpl.exemplars) {
        out += "Document: ";
        out += ex.document;
        out += "\nQuery: ";
        out += ex.query;
        out += "\n\n";
    }
    out += "Document: ";
    out += input;
    out += "\nQuery:";
    return out;
}

inline std::string build_qbe_prompt(std::string_view example_doc, const PromptTemplate& tmpl) {
    if (is_blank(example_doc)) throw Error(ErrorCode::invalid_argument, "example document must be non-empty");
    tmpl.validate();
    return render_prompt(tmpl, utf8_prefix(example_doc, tmpl.doc_char_budget));
}

/// Standalone expansion prompt: "<instruction> : <query>".
inline std::string build_reformulation_prompt(std::string_view instruction, std::string_view query) {
    if (is_blank(instruction)) throw Error(ErrorCode::invalid_argument, "reformulation instruction must be non-empty");
    if (is_blank(query)) throw Error(ErrorCode::invalid_argument, "query must be non-empty");
    std::string out(instruction);
    out += " : ";
    out += query;
    return out;
}

/// Feedback prompt: every "{document}" in the instruction is replaced by the
/// (truncated) document, then " : <query>" is appended.
inline std::string build_feedback_prompt(std::string_view instruction, std::string_view document,
                                         std::string_view query, std::size_t doc_char_budget = kDefaultDocCharBudget) {
    if (instruction.find(kDocumentPlaceholder) == std::string_view::npos) {
        throw Error(ErrorCode::invalid_argument, "feedback instruction must contain the {document} placeholder");
    }
    if (is_blank(query)) throw Error(ErrorCode::invalid_argument, "query must be non-empty");
    const auto doc = utf8_prefix(document, doc_char_budget);
    std::string out;
    std::size_t pos = 0;
    while (true) {
        const auto hit = instruction.find(kDocumentPlaceholder, pos);
        if (hit == std::string_view::npos) break;
        out.append(instruction.substr(pos, hit - pos));
        out.append(doc);
        pos = hit + kDocumentPlaceholder.size();
    }
    out.append(instruction.substr(pos));
    out += " : ";
    out += query;
    return out;
}

/// Splits generator output on commas, semicolons and newlines; trims,
/// lowercases, drops empties and repeats (first occurrence wins); keeps at
/// most `cap` keywords.
inline std::vector<std::string> parse_keywords(std::string_view raw, std::size_t cap = kKeywordCap) {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    std::size_t start = 0;
    while (start <= raw.size() && out.size() < cap) {
        const auto end = raw.find_first_of(",;\n", start);
        const auto piece = trim(raw.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
        if (!piece.empty()) {
            auto kw = to_lower(piece);
            if (seen.insert(kw).second) out.push_back(std::move(kw));
        }
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Generators

enum class GeneratorKind { http_endpoint, stub };

inline std::string_view to_string(GeneratorKind k) noexcept { return k == GeneratorKind::stub ? "stub" : "http"; }

inline GeneratorKind generator_kind_from_string(std::string_view s) {
    if (s == "stub") return GeneratorKind::stub;
    if (s == "http" || s == "http_endpoint") return GeneratorKind::http_endpoint;
    throw Error(ErrorCode::invalid_argument, "unknown generator kind '" + std::string(s) + "'");
}

struct GeneratorConfig {
    GeneratorKind kind = GeneratorKind::stub;
    std::optional<std::string> endpoint_url;
    std::optional<std::string> model_id;
    std::size_t max_new_tokens = 64;
    double temperature = 0.0;
    std::size_t num_candidates = kDefaultNumCandidates;
    std::optional<std::int64_t> seed = 7;

    friend bool operator==(const GeneratorConfig&, const GeneratorConfig&) = default;

    void validate() const {
        if (kind == GeneratorKind::http_endpoint && (!endpoint_url || endpoint_url->empty())) {
            throw Error(ErrorCode::invalid_argument, "http generator requires endpoint_url");
        }
        if (kind == GeneratorKind::stub && !seed) throw Error(ErrorCode::invalid_argument, "stub generator requires seed");
        if (!(temperature >= 0.0)) throw Error(ErrorCode::invalid_argument, "temperature must be >= 0");
        if (num_candidates == 0) throw Error(ErrorCode::invalid_argument, "num_candidates must be >= 1");
        if (max_new_tokens == 0) throw Error(ErrorCode::invalid_argument, "max_new_tokens must be >= 1");
    }
};

struct GenerationParams {
    std::size_t max_new_tokens = 64;
    double temperature = 0.0;
    std::size_t n = 1;
    std::optional<std::string> model_id;
};

inline GenerationParams params_for(const GeneratorConfig& c) {
    return {c.max_new_tokens, c.temperature, c.num_candidates, c.model_id};
}

/// Prompt in, raw candidate strings out. Implementations throw
/// Error(generator_error) on transport or protocol failure.
class TextGenerator {
public:
    virtual ~TextGenerator() = default;
    virtual std::vector<std::string> complete(const std::string& prompt, const GenerationParams& params) = 0;
    virtual QuerySource source() const noexcept { return QuerySource::generator; }
};

/// The text a generator is asked to work on:
///   - a ```fenced``` context block when present (feedback prompts),
///   - otherwise the last "Document: " slot of a few-shot prompt,
///   - otherwise whatever follows the last " : " (keyword prompts),
///   - otherwise the whole prompt.
inline std::string_view extract_input_slot(std::string_view prompt) {
    constexpr std::string_view fence = "```";
    if (const auto open = prompt.find(fence); open != std::string_view::npos) {
        const auto body = open + fence.size();
        if (const auto close = prompt.find(fence, body); close != std::string_view::npos) {
            return trim(prompt.substr(body, close - body));
        }
    }
    constexpr std::string_view doc_tag = "Document: ";
    constexpr std::string_view query_tail = "\nQuery:";
    if (prompt.size() >= query_tail.size() && prompt.substr(prompt.size() - query_tail.size()) == query_tail) {
        if (const auto at = prompt.rfind(doc_tag); at != std::string_view::npos) {
            const auto body = at + doc_tag.size();
            return trim(prompt.substr(body, prompt.size() - query_tail.size() - body));
        }
    }
    constexpr std::string_view sep = " : ";
    if (const auto at = prompt.rfind(sep); at != std::string_view::npos) return trim(prompt.substr(at + sep.size()));
    return trim(prompt);
}

/// Input terms ordered by descending idf over the index, ties alphabetical.
/// Terms absent from the index get df = 0 and therefore the highest idf.
inline std::vector<std::string> terms_by_idf(std::string_view text, const InvertedIndex& index) {
    std::set<std::string> distinct;
    for (auto& t : tokenize(text)) distinct.insert(std::move(t));
    std::vector<std::pair<double, std::string>> scored;
    scored.reserve(distinct.size());
    for (const auto& t : distinct) scored.emplace_back(idf(index.num_docs(), index.doc_freq(t)), t);
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<std::string> out;
    out.reserve(scored.size());
    for (auto& [_, t] : scored) out.push_back(std::move(t));
    return out;
}

/// Deterministic offline generator: candidate i (0-based) is the top (2 + i)
/// idf-ranked terms of the prompt's input slot joined by spaces. The seed is
/// accepted for interface parity; no output depends on it.
inline std::vector<std::string> stub_generate(std::string_view prompt, const InvertedIndex& index,
                                              std::int64_t /*seed*/, std::size_t n) {
    const auto input = extract_input_slot(prompt);
    if (input.empty()) throw Error(ErrorCode::generator_error, "stub generator: prompt input slot is empty");
    const auto ranked = terms_by_idf(input, index);
    if (ranked.empty()) throw Error(ErrorCode::generator_error, "stub generator: input slot has no terms");

    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
        const auto take = std::min(ranked.size(), 2 + i);
        std::string candidate;
        for (std::size_t j = 0; j < take; ++j) {
            if (j) candidate += ' ';
            candidate += ranked[j];
        }
        if (std::find(out.begin(), out.end(), candidate) == out.end()) out.push_back(std::move(candidate));
    }
    return out;
}

class StubGenerator final : public TextGenerator {
public:
    StubGenerator(std::shared_ptr<const InvertedIndex> index, std::int64_t seed)
        : index_(std::move(index)), seed_(seed) {
        if (!index_) throw Error(ErrorCode::invalid_argument, "stub generator needs an index");
    }

    std::vector<std::string> complete(const std::string& prompt, const GenerationParams& params) override {
        return stub_generate(prompt, *index_, seed_, params.n);
    }

    QuerySource source() const noexcept override { return QuerySource::stub; }

private:
    std::shared_ptr<const InvertedIndex> index_;
    std::int64_t seed_;
};

struct GeneratedQuery {
    std::string text;
    QuerySource source = QuerySource::generator;
    std::int64_t created_at = 0;

    friend bool operator==(const GeneratedQuery&, const GeneratedQuery&) = default;
};

/// Calls the generator once, trims and de-duplicates its output and caps it
/// at num_candidates. May return an empty list.
inline std::vector<GeneratedQuery> generate_candidates(TextGenerator& generator, const std::string& prompt,
                                                       const GeneratorConfig& config, const Clock& clock = system_clock_ms) {
    config.validate();
    const auto raw = generator.complete(prompt, params_for(config));
    const auto now = clock();
    std::vector<GeneratedQuery> out;
    std::unordered_set<std::string> seen;
    for (const auto& r : raw) {
        if (out.size() >= config.num_candidates) break;
        const auto text = std::string(trim(r));
        if (text.empty() || !seen.insert(text).second) continue;
        out.push_back({text, generator.source(), now});
    }
    return out;
}

/// Generates query candidates for a rendered prompt and records exactly one
/// query-log event (source=generator, query = first candidate, previous =
/// the session's last query).
inline std::vector<GeneratedQuery> query_generator(TextGenerator& generator, const std::string& prompt,
                                                   const GeneratorConfig& config, SessionLog& log,
                                                   const Session& session) {
    auto candidates = generate_candidates(generator, prompt, config);
    if (candidates.empty()) throw Error(ErrorCode::generator_error, "generator returned no non-empty candidates");
    log.on_query_change(session, kGeneratedQueriesLog, log.last_query(session.session_id), candidates.front().text,
                        QuerySource::generator);
    return candidates;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

/// Non-negative integer field; rejects negatives and non-integers instead of
/// letting them wrap into size_t.
inline std::size_t json_count(const nlohmann::json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw Error(ErrorCode::invalid_argument, std::string(key) + " must be a non-negative integer");
    }
    return v.get<std::size_t>();
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const PromptTemplate& t) {
    nlohmann::ordered_json j;
    j["instruction"] = t.instruction;
    auto& ex = j["exemplars"] = nlohmann::ordered_json::array();
    for (const auto& e : t.exemplars) ex.push_back({{"document", e.document}, {"query", e.query}});
    j["doc_char_budget"] = t.doc_char_budget;
    return j;
}

inline PromptTemplate prompt_template_from_json(const nlohmann::json& j, PromptTemplate base = {}) {
    if (!j.is_object()) throw Error(ErrorCode::invalid_argument, "qg_template must be an object");
    try {
        if (j.contains("instruction")) base.instruction = j.at("instruction").get<std::string>();
        if (j.contains("exemplars")) {
            base.exemplars.clear();
            for (const auto& e : j.at("exemplars")) {
                base.exemplars.push_back({e.at("document").get<std::string>(), e.at("query").get<std::string>()});
            }
        }
        if (j.contains("doc_char_budget")) base.doc_char_budget = detail::json_count(j, "doc_char_budget");
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::invalid_argument, std::string("qg_template: ") + e.what());
    }
    base.validate();
    return base;
}

inline nlohmann::ordered_json to_json(const GeneratorConfig& c) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(c.kind);
    j["endpoint_url"] = c.endpoint_url ? nlohmann::ordered_json(*c.endpoint_url) : nlohmann::ordered_json(nullptr);
    j["model_id"] = c.model_id ? nlohmann::ordered_json(*c.model_id) : nlohmann::ordered_json(nullptr);
    j["max_new_tokens"] = c.max_new_tokens;
    j["temperature"] = c.temperature;
    j["num_candidates"] = c.num_candidates;
    j["seed"] = c.seed ? nlohmann::ordered_json(*c.seed) : nlohmann::ordered_json(nullptr);
    return j;
}

inline GeneratorConfig generator_config_from_json(const nlohmann::json& j, GeneratorConfig base = {}) {
    if (!j.is_object()) throw Error(ErrorCode::invalid_argument, "generator must be an object");
    const auto opt_string = [&](const char* key, std::optional<std::string>& out) {
        if (!j.contains(key)) return;
        out = j.at(key).is_null() ? std::nullopt : std::optional(j.at(key).get<std::string>());
    };
    try {
        if (j.contains("kind")) base.kind = generator_kind_from_string(j.at("kind").get<std::string>());
        opt_string("endpoint_url", base.endpoint_url);
        opt_string("model_id", base.model_id);
        if (j.contains("max_new_tokens")) base.max_new_tokens = detail::json_count(j, "max_new_tokens");
        if (j.contains("temperature")) base.temperature = j.at("temperature").get<double>();
        if (j.contains("num_candidates")) base.num_candidates = detail::json_count(j, "num_candidates");
        if (j.contains("seed")) {
            base.seed = j.at("seed").is_null() ? std::nullopt : std::optional(j.at("seed").get<std::int64_t>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::invalid_argument, std::string("generator: ") + e.what());
    }
    base.validate();
    return base;
}

}  // namespace qx
