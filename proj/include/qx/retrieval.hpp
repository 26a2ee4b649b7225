#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qx/error.hpp"
#include "qx/index.hpp"
#include "qx/scoring.hpp"
#include "qx/text.hpp"

namespace qx {

inline constexpr std::size_t kDefaultTopK = 10;

struct ScoredDoc {
    std::string docno;
    double score = 0.0;
    std::size_t rank = 0;  // 1-based
    std::string text;
    std::optional<std::string> translated_text;
};

/// Distinct query terms with their in-query frequency, sorted by term.
inline std::map<std::string, std::uint32_t> query_term_counts(std::string_view query_text) {
    std::map<std::string, std::uint32_t> counts;
    for (auto& t : tokenize(query_text)) ++counts[std::move(t)];
    return counts;
}

/// Scores within this relative distance of the next higher score are a tie.
/// Rounding noise is around 1e-16 relative; genuine score gaps are far wider.
/// Mathematically equal scores (idf(1) + idf(7) == idf(2) + idf(4), since
/// idf is a log ratio) can otherwise land a few ulps apart in either order.
inline constexpr double kScoreTieTolerance = 1e-12;

/// Term-at-a-time scoring over the postings of each query term. Results are
/// ordered by (score desc, docno asc) and truncated to k. Consecutive scores
/// closer than kScoreTieTolerance form a tie group that reports the group's
/// highest score and is ordered by docno.
inline std::vector<ScoredDoc> retrieve(const InvertedIndex& index, std::string_view query_text,
                                       const ScoringFunction& scorer, std::size_t k = kDefaultTopK) {
    if (k == 0) throw Error(ErrorCode::invalid_argument, "k must be >= 1");
    const auto terms = query_term_counts(query_text);
    if (terms.empty()) throw Error(ErrorCode::invalid_argument, "query has no terms after tokenization");

    std::unordered_map<std::uint32_t, double> accumulators;
    for (const auto& [term, qtf] : terms) {
        const auto list = index.postings(term);
        const auto df = static_cast<std::uint32_t>(list.size());
        const double term_factor = scorer.term_factor(index.num_docs(), df);
        for (const auto& p : list) {
            const TermStatistics stats{p.tf, df, index.doc_length(p.doc), index.num_docs(), index.avg_doc_length()};
            accumulators[p.doc] += static_cast<double>(qtf) * scorer.doc_factor(stats) * term_factor;
        }
    }

    struct Candidate {
        std::uint32_t doc;
        double score;
    };
    std::vector<Candidate> candidates;
    candidates.reserve(accumulators.size());
    for (const auto& [doc, score] : accumulators) candidates.push_back({doc, score});

    const auto docno_of = [&](const Candidate& c) -> const std::string& { return index.document(c.doc).docno; };
    std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return docno_of(a) < docno_of(b);
    });
    double previous_raw = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double raw = candidates[i].score;
        if (i > 0 && previous_raw - raw <= kScoreTieTolerance * std::fabs(previous_raw)) {
            candidates[i].score = candidates[i - 1].score;
        }
        previous_raw = raw;
    }
    const auto keep = std::min(k, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                      [&](const Candidate& a, const Candidate& b) {
                          if (a.score != b.score) return a.score > b.score;
                          return docno_of(a) < docno_of(b);
                      });

    std::vector<ScoredDoc> results;
    results.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        const auto& doc = index.document(candidates[i].doc);
        results.push_back({doc.docno, candidates[i].score, i + 1, doc.text, std::nullopt});
    }
    return results;
}

inline std::vector<ScoredDoc> retrieve(const InvertedIndex& index, std::string_view query_text,
                                       const PipelineRegistry& registry, const std::string& pipeline_name,
                                       std::size_t k = kDefaultTopK) {
    return retrieve(index, query_text, registry.lookup(pipeline_name), k);
}

}  // namespace qx
