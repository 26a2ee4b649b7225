#pragma once

#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <string_view>

#include "qx/error.hpp"
#include "qx/session_log.hpp"

namespace qx {

/// Byte-exact concatenation of queries, results and annotations logs.
inline void export_logs_jsonl(const std::filesystem::path& log_dir, std::ostream& out) {
    for (const auto s : kAllStreams) {
        std::ifstream in(log_dir / log_file_name(s), std::ios::binary);
        if (in) out << in.rdbuf();
    }
}

inline std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (const char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline constexpr std::string_view kCsvHeader =
    "stream,session_id,timestamp_ms,previous_query,query,source,log_name,pipeline,results,docno,grade";

/// One CSV row per log record over the union of the three schemas; columns a
/// stream lacks are left empty, and the results list is embedded as JSON.
inline std::size_t export_logs_csv(const std::filesystem::path& log_dir, std::ostream& out) {
    out << kCsvHeader << '\n';
    std::size_t rows = 0;
    const auto row = [&](std::initializer_list<std::string> fields) {
        bool first = true;
        for (const auto& f : fields) {
            if (!first) out << ',';
            out << csv_escape(f);
            first = false;
        }
        out << '\n';
        ++rows;
    };
    for (const auto& j : read_jsonl(log_dir / log_file_name(LogStream::queries))) {
        const auto e = query_event_from_json(j);
        row({"queries", e.session_id, std::to_string(e.timestamp_ms), e.previous_query.value_or(""), e.query,
             std::string(to_string(e.source)), e.log_name, "", "", "", ""});
    }
    for (const auto& j : read_jsonl(log_dir / log_file_name(LogStream::results))) {
        const auto r = result_record_from_json(j);
        row({"results", r.session_id, std::to_string(r.timestamp_ms), "", r.query, "", "", r.pipeline,
             j.at("results").dump(), "", ""});
    }
    for (const auto& j : read_jsonl(log_dir / log_file_name(LogStream::annotations))) {
        const auto a = annotation_from_json(j);
        row({"annotations", a.session_id, std::to_string(a.timestamp_ms), "", a.query, "", "", "", "", a.docno,
             std::to_string(a.grade)});
    }
    return rows;
}

}  // namespace qx
