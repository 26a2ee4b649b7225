#pragma once

/// Query expansion flows: standalone keyword expansion and expansion from
/// user-selected feedback documents. Both take the first generator
/// candidate, parse it into keywords and append only words the query does
/// not already contain.

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "qx/error.hpp"
#include "qx/generation.hpp"
#include "qx/index.hpp"
#include "qx/session_log.hpp"
#include "qx/text.hpp"

namespace qx {

struct ReformulationRequest {
    Session session;
    std::string query;
    std::vector<std::string> selected_docs;  // empty for standalone expansion
    GeneratorConfig config;
};

struct ReformulationOptions {
    std::size_t keyword_cap = kKeywordCap;
    std::size_t doc_char_budget = kDefaultDocCharBudget;
};

struct Expansion {
    std::string query;                  // original query, plus " " + appended words when any
    std::vector<std::string> appended;  // lowercased words, in append order
};

struct ReformulationResult {
    std::string query;
    std::vector<std::string> appended;
    bool recorded = false;  // whether a query-log event was written
};

namespace detail {

inline std::vector<std::string_view> split_whitespace(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::string_view(" \t\r\n\f\v").find(s[i]) != std::string_view::npos) ++i;
        std::size_t j = i;
        while (j < s.size() && std::string_view(" \t\r\n\f\v").find(s[j]) == std::string_view::npos) ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

}  // namespace detail

/// Appends keyword words to `query`. Multi-word keywords are split on
/// whitespace. A word is dropped when, lowercased, it equals a query word or
/// query term, repeats an earlier appended word, or contains no term
/// characters. At most `cap` words are appended.
inline Expansion compose_expanded_query(std::string_view query, const std::vector<std::string>& keywords,
                                        std::size_t cap = kKeywordCap) {
    std::unordered_set<std::string> present;
    for (auto& t : tokenize(query)) present.insert(std::move(t));
    for (const auto w : detail::split_whitespace(query)) present.insert(to_lower(w));

    Expansion out{std::string(query), {}};
    for (const auto& kw : keywords) {
        for (const auto word : detail::split_whitespace(kw)) {
            if (out.appended.size() >= cap) break;
            auto lw = to_lower(word);
            if (tokenize(lw).empty() || !present.insert(lw).second) continue;
            out.appended.push_back(std::move(lw));
        }
    }
    for (const auto& w : out.appended) {
        out.query += ' ';
        out.query += w;
    }
    return out;
}

/// Standalone expansion. Writes one reformulator event whenever the generator
/// produced keywords, even if all of them were already in the query; writes
/// nothing when the generator output is empty or the call fails.
inline ReformulationResult append_keywords(const ReformulationRequest& req, std::string_view instruction,
                                           TextGenerator& generator, SessionLog& log,
                                           const ReformulationOptions& options = {}) {
    if (is_blank(req.query)) throw Error(ErrorCode::invalid_argument, "query must be non-empty");
    if (!req.selected_docs.empty()) {
        throw Error(ErrorCode::invalid_argument, "standalone reformulation takes no selected documents");
    }
    const auto prompt = build_reformulation_prompt(instruction, req.query);
    const auto candidates = generate_candidates(generator, prompt, req.config);
    if (candidates.empty()) return {req.query, {}, false};
    const auto keywords = parse_keywords(candidates.front().text, options.keyword_cap);
    if (keywords.empty()) return {req.query, {}, false};

    auto expansion = compose_expanded_query(req.query, keywords, options.keyword_cap);
    log.on_query_change(req.session, kReformulationsLog, req.query, expansion.query, QuerySource::reformulator);
    return {std::move(expansion.query), std::move(expansion.appended), true};
}

/// Feedback expansion: one prompt per selected document, keywords merged in
/// first-occurrence order and capped, then composed as in append_keywords.
/// Unknown docnos are rejected before any generator call.
inline ReformulationResult send_feedback(const ReformulationRequest& req, std::string_view instruction,
                                         const InvertedIndex& index, TextGenerator& generator, SessionLog& log,
                                         const ReformulationOptions& options = {}) {
    if (is_blank(req.query)) throw Error(ErrorCode::invalid_argument, "query must be non-empty");
    if (req.selected_docs.empty()) throw Error(ErrorCode::invalid_argument, "feedback needs at least one document");
    for (const auto& docno : req.selected_docs) {
        if (!index.contains(docno)) throw Error(ErrorCode::not_found, "unknown docno '" + docno + "'");
    }

    std::vector<std::string> merged;
    std::unordered_set<std::string> seen;
    for (const auto& docno : req.selected_docs) {
        const auto prompt =
            build_feedback_prompt(instruction, index.get_doc_text(docno), req.query, options.doc_char_budget);
        const auto candidates = generate_candidates(generator, prompt, req.config);
        if (candidates.empty()) continue;
        for (auto& kw : parse_keywords(candidates.front().text, options.keyword_cap)) {
            if (merged.size() >= options.keyword_cap) break;
            if (seen.insert(kw).second) merged.push_back(std::move(kw));
        }
    }
    if (merged.empty()) return {req.query, {}, false};

    auto expansion = compose_expanded_query(req.query, merged, options.keyword_cap);
    log.on_query_change(req.session, kFeedbackReformulationsLog, req.query, expansion.query, QuerySource::feedback);
    return {std::move(expansion.query), std::move(expansion.appended), true};
}

}  // namespace qx
