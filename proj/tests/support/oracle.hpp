#pragma once

// Brute-force reference rankers for tests. Works from raw per-document term
// lists and recomputes every statistic per query; shares no code with the
// index or scoring headers.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace qx::testing {

struct RawDoc {
    std::string docno;
    std::vector<std::string> terms;
};

enum class OracleModel { bm25, tf_idf };

struct OracleHit {
    std::string docno;
    double score;
};

inline std::vector<OracleHit> brute_force_rank(const std::vector<RawDoc>& docs, const std::vector<std::string>& query,
                                               OracleModel model, std::size_t k) {
    const double k1 = 1.2;
    const double b = 0.75;
    const double n = static_cast<double>(docs.size());
    double total = 0;
    for (const auto& d : docs) total += static_cast<double>(d.terms.size());
    const double avgdl = total / n;

    std::map<std::string, int> qtf;
    for (const auto& t : query) qtf[t] += 1;

    std::vector<OracleHit> hits;
    for (const auto& d : docs) {
        double score = 0;
        bool matched = false;
        for (const auto& [term, qcount] : qtf) {
            const double tf = static_cast<double>(std::count(d.terms.begin(), d.terms.end(), term));
            if (tf == 0) continue;
            matched = true;
            double df = 0;
            for (const auto& other : docs) {
                if (std::find(other.terms.begin(), other.terms.end(), term) != other.terms.end()) df += 1;
            }
            const double w = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
            const double dl = static_cast<double>(d.terms.size());
            const double tf_part = model == OracleModel::bm25 ? tf * (k1 + 1) / (tf + k1 * (1 - b + b * dl / avgdl)) : tf;
            score += qcount * tf_part * w;
        }
        if (matched) hits.push_back({d.docno, score});
    }
    // Tie contract: a score within 1e-12 (relative) of the next higher raw
    // score joins its group; groups carry their top score, members go by docno.
    std::sort(hits.begin(), hits.end(), [](const OracleHit& a, const OracleHit& c) { return a.score > c.score; });
    std::vector<double> raw;
    for (const auto& h : hits) raw.push_back(h.score);
    for (std::size_t i = 1; i < hits.size(); ++i) {
        if (raw[i - 1] - raw[i] <= 1e-12 * raw[i - 1]) hits[i].score = hits[i - 1].score;
    }
    std::sort(hits.begin(), hits.end(), [](const OracleHit& a, const OracleHit& c) {
        if (a.score != c.score) return a.score > c.score;
        return a.docno < c.docno;
    });
    if (hits.size() > k) hits.resize(k);
    return hits;
}

inline std::string join(const std::vector<std::string>& terms) {
    std::string out;
    for (const auto& t : terms) {
        if (!out.empty()) out += ' ';
        out += t;
    }
    return out;
}

/// Random corpus: 1..max_docs documents of 1..max_terms terms drawn from a
/// small vocabulary so collisions and ties are frequent.
inline std::vector<RawDoc> random_corpus(std::mt19937_64& rng, std::size_t max_docs = 20, std::size_t max_terms = 8,
                                         std::size_t vocab = 12) {
    std::uniform_int_distribution<std::size_t> ndocs(1, max_docs), nterms(1, max_terms), word(0, vocab - 1);
    std::vector<RawDoc> docs(ndocs(rng));
    for (std::size_t i = 0; i < docs.size(); ++i) {
        docs[i].docno = "doc" + std::to_string(i);
        const auto len = nterms(rng);
        for (std::size_t j = 0; j < len; ++j) docs[i].terms.push_back("w" + std::to_string(word(rng)));
    }
    std::shuffle(docs.begin(), docs.end(), rng);
    return docs;
}

inline std::vector<std::string> random_query(std::mt19937_64& rng, std::size_t vocab = 14) {
    std::uniform_int_distribution<std::size_t> len(1, 4), word(0, vocab - 1);
    std::vector<std::string> q(len(rng));
    for (auto& t : q) t = "w" + std::to_string(word(rng));
    return q;
}

}  // namespace qx::testing
