#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "qx/error.hpp"
#include "qx/text.hpp"

namespace qx {

struct Document {
    std::string docno;
    std::string text;
    std::string lang = "eng";  // ISO-639-3
    std::optional<std::string> title;

    friend bool operator==(const Document&, const Document&) = default;
};

struct Corpus {
    std::vector<Document> documents;

    std::size_t size() const noexcept { return documents.size(); }
    bool empty() const noexcept { return documents.empty(); }
    auto begin() const noexcept { return documents.begin(); }
    auto end() const noexcept { return documents.end(); }
};

inline nlohmann::ordered_json to_json(const Document& doc) {
    nlohmann::ordered_json j;
    j["docno"] = doc.docno;
    j["text"] = doc.text;
    j["lang"] = doc.lang;
    if (doc.title) j["title"] = *doc.title;
    return j;
}

/// Validates one corpus record. `where` prefixes error messages.
inline Document document_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object()) throw Error(ErrorCode::parse_error, where + ": record is not a JSON object");

    const auto required_string = [&](const char* field) -> std::string {
        const auto it = j.find(field);
        if (it == j.end()) throw Error(ErrorCode::parse_error, where + ": missing field '" + field + "'");
        if (!it->is_string()) throw Error(ErrorCode::parse_error, where + ": field '" + field + "' is not a string");
        return it->get<std::string>();
    };

    Document doc;
    doc.docno = required_string("docno");
    doc.text = required_string("text");
    if (doc.docno.empty()) throw Error(ErrorCode::parse_error, where + ": empty docno");
    if (is_blank(doc.text)) throw Error(ErrorCode::parse_error, where + ": empty text for docno '" + doc.docno + "'");

    if (const auto it = j.find("lang"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw Error(ErrorCode::parse_error, where + ": field 'lang' is not a string");
        doc.lang = it->get<std::string>();
    }
    if (const auto it = j.find("title"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw Error(ErrorCode::parse_error, where + ": field 'title' is not a string");
        doc.title = it->get<std::string>();
    }
    return doc;
}

/// Reads JSONL corpus records from `in`. Blank lines are skipped; line
/// numbers in errors are 1-based.
inline Corpus parse_corpus(std::istream& in, const std::string& source_name = "<stream>") {
    Corpus corpus;
    std::unordered_map<std::string, std::size_t> first_seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        const std::string where = source_name + ":" + std::to_string(line_no);

        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorCode::parse_error, where + ": malformed JSON (" + e.what() + ")");
        }
        Document doc = document_from_json(j, where);

        const auto [it, inserted] = first_seen.emplace(doc.docno, line_no);
        if (!inserted) {
            throw Error(ErrorCode::duplicate, where + ": duplicate docno '" + doc.docno + "' (first seen on line " +
                                                  std::to_string(it->second) + ")");
        }
        corpus.documents.push_back(std::move(doc));
    }
    return corpus;
}

inline Corpus ingest_corpus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot open corpus file: " + path.string());
    return parse_corpus(in, path.string());
}

}  // namespace qx
