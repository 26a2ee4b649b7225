#pragma once

/// Term-weighting functions and the named pipeline registry.
///
/// A pipeline scores a document as the sum over distinct query terms of
/// (query term frequency x term weight). Only documents sharing at least one
/// term with the query are scored.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "qx/error.hpp"

namespace qx {

struct TermStatistics {
    std::uint32_t tf = 0;          // occurrences of the term in the document
    std::uint32_t df = 0;          // documents containing the term
    std::uint32_t doc_length = 0;  // tokens in the document
    std::size_t num_docs = 0;
    double avg_doc_length = 0.0;
};

/// ln(1 + (N - df + 0.5) / (df + 0.5)). Strictly positive for df <= N, so
/// every matching term adds a positive BM25 contribution.
inline double idf(std::size_t num_docs, std::uint32_t df) noexcept {
    const double n = static_cast<double>(num_docs);
    const double d = static_cast<double>(df);
    return std::log1p((n - d + 0.5) / (d + 0.5));
}

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

/// Document-side BM25 factor: tf (k1 + 1) / (tf + k1 (1 - b + b dl / avgdl)).
inline double bm25_tf_factor(const TermStatistics& s, Bm25Params p = {}) noexcept {
    if (s.tf == 0) return 0.0;
    const double tf = static_cast<double>(s.tf);
    const double norm = 1.0 - p.b + p.b * static_cast<double>(s.doc_length) / s.avg_doc_length;
    return tf * (p.k1 + 1.0) / (tf + p.k1 * norm);
}

inline double bm25_weight(const TermStatistics& s, Bm25Params p = {}) noexcept {
    return idf(s.num_docs, s.df) * bm25_tf_factor(s, p);
}

inline double tf_idf_weight(const TermStatistics& s) noexcept {
    return static_cast<double>(s.tf) * idf(s.num_docs, s.df);
}

/// What a pipeline registry entry holds. A term's weight in a document is
/// doc_factor(stats) x term_factor(num_docs, df); the term factor is
/// evaluated once per query term.
struct ScoringFunction {
    std::string description;
    std::function<double(const TermStatistics&)> doc_factor;
    std::function<double(std::size_t num_docs, std::uint32_t df)> term_factor;

    double term_weight(const TermStatistics& s) const { return doc_factor(s) * term_factor(s.num_docs, s.df); }
};

inline ScoringFunction make_bm25(Bm25Params params = {}) {
    return {"BM25 (k1=" + std::to_string(params.k1) + ", b=" + std::to_string(params.b) + ")",
            [params](const TermStatistics& s) { return bm25_tf_factor(s, params); },
            [](std::size_t n, std::uint32_t df) { return idf(n, df); }};
}

inline ScoringFunction make_tf_idf() {
    return {"TF-IDF (raw tf x idf)", [](const TermStatistics& s) { return static_cast<double>(s.tf); },
            [](std::size_t n, std::uint32_t df) { return idf(n, df); }};
}

/// Name -> scoring function. Starts with "BM25" and "TF_IDF". Lookups take a
/// shared lock; registration is exclusive.
class PipelineRegistry {
public:
    using WarningSink = std::function<void(std::string_view)>;

    PipelineRegistry() {
        entries_.emplace("BM25", make_bm25());
        entries_.emplace("TF_IDF", make_tf_idf());
    }

    void set_warning_sink(WarningSink sink) {
        std::unique_lock lock(mutex_);
        warn_ = std::move(sink);
    }

    void register_pipeline(const std::string& name, ScoringFunction scorer) {
        if (name.empty()) throw Error(ErrorCode::invalid_argument, "pipeline name must be non-empty");
        if (!scorer.doc_factor || !scorer.term_factor) throw Error(ErrorCode::invalid_argument, "pipeline '" + name + "' has no scorer");
        std::unique_lock lock(mutex_);
        const auto [it, inserted] = entries_.insert_or_assign(name, std::move(scorer));
        if (!inserted) {
            const std::string msg = "pipeline '" + name + "' re-registered; previous scorer replaced";
            if (warn_) {
                warn_(msg);
            } else {
                std::clog << "warning: " << msg << '\n';
            }
        }
    }

    ScoringFunction lookup(const std::string& name) const {
        std::shared_lock lock(mutex_);
        const auto it = entries_.find(name);
        if (it == entries_.end()) throw Error(ErrorCode::unknown_pipeline, "unknown pipeline '" + name + "'");
        return it->second;
    }

    bool contains(const std::string& name) const {
        std::shared_lock lock(mutex_);
        return entries_.count(name) != 0;
    }

    std::vector<std::string> names() const {
        std::shared_lock lock(mutex_);
        std::vector<std::string> out;
        out.reserve(entries_.size());
        for (const auto& [name, _] : entries_) out.push_back(name);
        return out;
    }

    std::map<std::string, std::string> descriptions() const {
        std::shared_lock lock(mutex_);
        std::map<std::string, std::string> out;
        for (const auto& [name, fn] : entries_) out.emplace(name, fn.description);
        return out;
    }

private:
    mutable std::shared_mutex mutex_;
    std::map<std::string, ScoringFunction> entries_;
    WarningSink warn_;
};

}  // namespace qx
