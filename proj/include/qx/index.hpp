#pragma once

/// Immutable in-memory inverted index plus its on-disk directory format.
///
/// Directory layout (format_version 1):
///   manifest.json    format tag, versions and collection statistics
///   documents.jsonl  one corpus record per line, in document-id order
///   postings.jsonl   {"term": str, "postings": [[doc_id, tf], ...]} sorted by term
///
/// Document ids are positions in ingestion order.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "qx/corpus.hpp"
#include "qx/error.hpp"
#include "qx/text.hpp"

namespace qx {

struct Posting {
    std::uint32_t doc = 0;
    std::uint32_t tf = 0;

    friend bool operator==(const Posting&, const Posting&) = default;
};

inline constexpr int kIndexFormatVersion = 1;
inline constexpr std::string_view kIndexFormatTag = "qx-inverted-index";

class InvertedIndex {
public:
    static InvertedIndex build(const Corpus& corpus) {
        if (corpus.empty()) throw Error(ErrorCode::invalid_argument, "cannot build an index over an empty corpus");

        InvertedIndex index;
        index.documents_ = corpus.documents;
        index.doc_lengths_.reserve(corpus.size());
        for (std::uint32_t id = 0; id < index.documents_.size(); ++id) {
            const auto& doc = index.documents_[id];
            if (!index.by_docno_.emplace(doc.docno, id).second) {
                throw Error(ErrorCode::duplicate, "duplicate docno '" + doc.docno + "'");
            }
            std::map<std::string, std::uint32_t> counts;
            const auto terms = tokenize(doc.text);
            for (const auto& t : terms) ++counts[t];
            for (const auto& [term, tf] : counts) index.postings_[term].push_back({id, tf});
            index.doc_lengths_.push_back(static_cast<std::uint32_t>(terms.size()));
            index.total_tokens_ += terms.size();
        }
        index.finish_statistics();
        return index;
    }

    std::size_t num_docs() const noexcept { return documents_.size(); }
    std::size_t num_terms() const noexcept { return postings_.size(); }
    std::uint64_t total_tokens() const noexcept { return total_tokens_; }
    double avg_doc_length() const noexcept { return avg_doc_length_; }

    std::uint32_t doc_freq(const std::string& term) const {
        const auto it = postings_.find(term);
        return it == postings_.end() ? 0 : static_cast<std::uint32_t>(it->second.size());
    }

    /// Postings sorted by ascending document id; empty for unknown terms.
    std::span<const Posting> postings(const std::string& term) const {
        const auto it = postings_.find(term);
        if (it == postings_.end()) return {};
        return it->second;
    }

    const std::map<std::string, std::vector<Posting>>& all_postings() const noexcept { return postings_; }

    std::optional<std::uint32_t> find(std::string_view docno) const {
        const auto it = by_docno_.find(std::string(docno));
        if (it == by_docno_.end()) return std::nullopt;
        return it->second;
    }

    bool contains(std::string_view docno) const { return find(docno).has_value(); }

    const Document& document(std::uint32_t id) const { return documents_.at(id); }
    const std::vector<Document>& documents() const noexcept { return documents_; }
    std::uint32_t doc_length(std::uint32_t id) const { return doc_lengths_.at(id); }
    const std::vector<std::uint32_t>& doc_lengths() const noexcept { return doc_lengths_; }

    /// Stored body text, byte-identical to what was ingested.
    const std::string& get_doc_text(std::string_view docno) const {
        const auto id = find(docno);
        if (!id) throw Error(ErrorCode::not_found, "unknown docno '" + std::string(docno) + "'");
        return documents_[*id].text;
    }

    nlohmann::ordered_json manifest() const {
        nlohmann::ordered_json m;
        m["format"] = kIndexFormatTag;
        m["format_version"] = kIndexFormatVersion;
        m["tokenizer_version"] = kTokenizerVersion;
        m["num_docs"] = num_docs();
        m["num_terms"] = num_terms();
        m["total_tokens"] = total_tokens_;
        m["avg_doc_length"] = avg_doc_length_;
        return m;
    }

    void save(const std::filesystem::path& dir) const {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) throw Error(ErrorCode::io_error, "cannot create index directory " + dir.string() + ": " + ec.message());

        write_file(dir / "documents.jsonl", [&](std::ostream& out) {
            for (const auto& doc : documents_) out << to_json(doc).dump() << '\n';
        });
        write_file(dir / "postings.jsonl", [&](std::ostream& out) {
            for (const auto& [term, list] : postings_) {
                nlohmann::ordered_json line;
                line["term"] = term;
                auto& arr = line["postings"] = nlohmann::ordered_json::array();
                for (const auto& p : list) arr.push_back({p.doc, p.tf});
                out << line.dump() << '\n';
            }
        });
        // Manifest last: a directory without one is an incomplete write.
        write_file(dir / "manifest.json", [&](std::ostream& out) { out << manifest().dump(2) << '\n'; });
    }

    static InvertedIndex load(const std::filesystem::path& dir) {
        const auto manifest_path = dir / "manifest.json";
        std::ifstream mf(manifest_path);
        if (!mf) throw Error(ErrorCode::io_error, "missing index manifest: " + manifest_path.string());
        nlohmann::json m;
        try {
            m = nlohmann::json::parse(mf);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::parse_error, "corrupt index manifest: " + std::string(e.what()));
        }
        if (m.value("format", "") != kIndexFormatTag) {
            throw Error(ErrorCode::parse_error, "not a qx index: " + dir.string());
        }
        if (m.value("format_version", -1) != kIndexFormatVersion) {
            throw Error(ErrorCode::parse_error, "unsupported index format_version in " + manifest_path.string());
        }
        if (m.value("tokenizer_version", -1) != kTokenizerVersion) {
            throw Error(ErrorCode::parse_error, "index built with a different tokenizer version; rebuild it");
        }

        InvertedIndex index;
        {
            const auto path = dir / "documents.jsonl";
            std::ifstream in(path, std::ios::binary);
            if (!in) throw Error(ErrorCode::io_error, "missing " + path.string());
            index.documents_ = parse_corpus(in, path.string()).documents;
        }
        for (std::uint32_t id = 0; id < index.documents_.size(); ++id) {
            index.by_docno_.emplace(index.documents_[id].docno, id);
        }
        index.doc_lengths_.assign(index.documents_.size(), 0);

        const auto path = dir / "postings.jsonl";
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error(ErrorCode::io_error, "missing " + path.string());
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            const std::string where = path.string() + ":" + std::to_string(line_no);
            try {
                const auto j = nlohmann::json::parse(line);
                auto& list = index.postings_[j.at("term").get<std::string>()];
                for (const auto& entry : j.at("postings")) {
                    const Posting p{entry.at(0).get<std::uint32_t>(), entry.at(1).get<std::uint32_t>()};
                    if (p.doc >= index.documents_.size() || p.tf == 0 || (!list.empty() && list.back().doc >= p.doc)) {
                        throw Error(ErrorCode::parse_error, where + ": invalid posting");
                    }
                    list.push_back(p);
                    index.doc_lengths_[p.doc] += p.tf;
                }
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorCode::parse_error, where + ": " + e.what());
            }
        }
        for (const auto len : index.doc_lengths_) index.total_tokens_ += len;
        index.finish_statistics();

        if (m.value("num_docs", std::size_t{0}) != index.num_docs() ||
            m.value("num_terms", std::size_t{0}) != index.num_terms() ||
            m.value("total_tokens", std::uint64_t{0}) != index.total_tokens_) {
            throw Error(ErrorCode::parse_error, "index files disagree with manifest statistics in " + dir.string());
        }
        if (index.documents_.empty()) throw Error(ErrorCode::parse_error, "index has no documents");
        return index;
    }

private:
    InvertedIndex() = default;

    void finish_statistics() {
        avg_doc_length_ = documents_.empty() ? 0.0
                                             : static_cast<double>(total_tokens_) /
                                                   static_cast<double>(documents_.size());
    }

    template <class Fn>
    static void write_file(const std::filesystem::path& path, Fn&& body) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
        body(out);
        out.flush();
        if (!out) throw Error(ErrorCode::io_error, "write failed: " + path.string());
    }

    std::vector<Document> documents_;
    std::vector<std::uint32_t> doc_lengths_;
    std::unordered_map<std::string, std::uint32_t> by_docno_;
    std::map<std::string, std::vector<Posting>> postings_;
    std::uint64_t total_tokens_ = 0;
    double avg_doc_length_ = 0.0;
};

}  // namespace qx
