#pragma once

/// Headless query-by-example runs: for each example document, generate
/// candidates and retrieve with the first one.
///
/// Output record: {"example_docno": str, "candidates": [str], "retrieved": [docno]}

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qx/corpus.hpp"
#include "qx/generation.hpp"
#include "qx/index.hpp"
#include "qx/retrieval.hpp"

namespace qx {

struct BatchRecord {
    std::string example_docno;
    std::vector<std::string> candidates;
    std::vector<std::string> retrieved;
};

inline nlohmann::ordered_json to_json(const BatchRecord& r) {
    nlohmann::ordered_json j;
    j["example_docno"] = r.example_docno;
    j["candidates"] = r.candidates;
    j["retrieved"] = r.retrieved;
    return j;
}

inline std::vector<BatchRecord> run_batch_qbe(const InvertedIndex& index, const Corpus& examples,
                                              TextGenerator& generator, const GeneratorConfig& config,
                                              const PromptTemplate& tmpl, const ScoringFunction& scorer,
                                              std::size_t k = kDefaultTopK) {
    std::vector<BatchRecord> out;
    out.reserve(examples.size());
    for (const auto& doc : examples) {
        BatchRecord record{doc.docno, {}, {}};
        const auto prompt = build_qbe_prompt(doc.text, tmpl);
        for (auto& c : generate_candidates(generator, prompt, config)) record.candidates.push_back(std::move(c.text));
        if (!record.candidates.empty() && !tokenize(record.candidates.front()).empty()) {
            for (auto& r : retrieve(index, record.candidates.front(), scorer, k)) {
                record.retrieved.push_back(std::move(r.docno));
            }
        }
        out.push_back(std::move(record));
    }
    return out;
}

inline void write_batch_jsonl(std::ostream& out, const std::vector<BatchRecord>& records) {
    for (const auto& r : records) out << to_json(r).dump() << '\n';
}

}  // namespace qx
