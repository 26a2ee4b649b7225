#pragma once

/// Append-only interaction logs.
///
/// Three JSONL streams live under one directory:
///   queries.jsonl      every realized query version with its source of change
///   results.jsonl      each retrieval with its ranked docnos and scores
///   annotations.jsonl  graded relevance judgments (0..3)
///
/// Every append is written, flushed and fsync'ed before the call returns.
/// Each stream has a single writer guarded by its own mutex. Readers open the
/// file independently and see a prefix of the appends.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <type_traits>
#include <vector>

#include "json.hpp"
#include "qx/error.hpp"
#include "qx/retrieval.hpp"
#include "qx/text.hpp"

namespace qx {

using Clock = std::function<std::int64_t()>;

inline std::int64_t system_clock_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

struct Session {
    std::string session_id;
    std::int64_t created_at = 0;
};

enum class QuerySource { generator, stub, user_edit, reformulator, feedback };

inline std::string_view to_string(QuerySource s) noexcept {
    switch (s) {
        case QuerySource::generator: return "generator";
        case QuerySource::stub: return "stub";
        case QuerySource::user_edit: return "user_edit";
        case QuerySource::reformulator: return "reformulator";
        case QuerySource::feedback: return "feedback";
    }
    return "generator";
}

inline QuerySource query_source_from_string(std::string_view s) {
    if (s == "generator") return QuerySource::generator;
    if (s == "stub") return QuerySource::stub;
    if (s == "user_edit") return QuerySource::user_edit;
    if (s == "reformulator") return QuerySource::reformulator;
    if (s == "feedback") return QuerySource::feedback;
    throw Error(ErrorCode::parse_error, "unknown query source '" + std::string(s) + "'");
}

// Log names used by the built-in flows.
inline constexpr std::string_view kGeneratedQueriesLog = "generated_queries";
inline constexpr std::string_view kUserEditsLog = "user_edits";
inline constexpr std::string_view kReformulationsLog = "query_reformulations";
inline constexpr std::string_view kFeedbackReformulationsLog = "feedback_query_reformulations";

struct QueryEvent {
    std::string session_id;
    std::int64_t timestamp_ms = 0;
    std::optional<std::string> previous_query;
    std::string query;
    QuerySource source = QuerySource::user_edit;
    std::string log_name;

    friend bool operator==(const QueryEvent&, const QueryEvent&) = default;
};

struct ResultEntry {
    std::string docno;
    std::int64_t rank = 0;
    double score = 0.0;

    friend bool operator==(const ResultEntry&, const ResultEntry&) = default;
};

struct ResultRecord {
    std::string session_id;
    std::int64_t timestamp_ms = 0;
    std::string query;
    std::string pipeline;
    std::vector<ResultEntry> results;

    friend bool operator==(const ResultRecord&, const ResultRecord&) = default;
};

inline constexpr int kMinGrade = 0;
inline constexpr int kMaxGrade = 3;

struct AnnotationRecord {
    std::string session_id;
    std::int64_t timestamp_ms = 0;
    std::string query;
    std::string docno;
    int grade = 0;

    friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

enum class LogStream { queries, results, annotations };

inline std::string_view to_string(LogStream s) noexcept {
    switch (s) {
        case LogStream::queries: return "queries";
        case LogStream::results: return "results";
        case LogStream::annotations: return "annotations";
    }
    return "queries";
}

inline std::optional<LogStream> log_stream_from_string(std::string_view s) noexcept {
    if (s == "queries") return LogStream::queries;
    if (s == "results") return LogStream::results;
    if (s == "annotations") return LogStream::annotations;
    return std::nullopt;
}

inline std::string log_file_name(LogStream s) { return std::string(to_string(s)) + ".jsonl"; }

inline constexpr LogStream kAllStreams[] = {LogStream::queries, LogStream::results, LogStream::annotations};

// ---------------------------------------------------------------------------
// Record (de)serialization. Field order follows the published schemas.

using ojson = nlohmann::ordered_json;

inline ojson to_json(const QueryEvent& e) {
    ojson j;
    j["session_id"] = e.session_id;
    j["timestamp_ms"] = e.timestamp_ms;
    j["previous_query"] = e.previous_query ? ojson(*e.previous_query) : ojson(nullptr);
    j["query"] = e.query;
    j["source"] = to_string(e.source);
    j["log_name"] = e.log_name;
    return j;
}

inline ojson to_json(const ResultRecord& r) {
    ojson j;
    j["session_id"] = r.session_id;
    j["timestamp_ms"] = r.timestamp_ms;
    j["query"] = r.query;
    j["pipeline"] = r.pipeline;
    auto& arr = j["results"] = ojson::array();
    for (const auto& e : r.results) {
        ojson item;
        item["docno"] = e.docno;
        item["rank"] = e.rank;
        item["score"] = e.score;
        arr.push_back(std::move(item));
    }
    return j;
}

inline ojson to_json(const AnnotationRecord& a) {
    ojson j;
    j["session_id"] = a.session_id;
    j["timestamp_ms"] = a.timestamp_ms;
    j["query"] = a.query;
    j["docno"] = a.docno;
    j["grade"] = a.grade;
    return j;
}

namespace detail {

template <class Json>
const Json& field(const Json& j, const char* name) {
    const auto it = j.find(name);
    if (it == j.end()) throw Error(ErrorCode::parse_error, std::string("missing field '") + name + "'");
    return *it;
}

template <class Json>
std::string string_field(const Json& j, const char* name) {
    const auto& v = field(j, name);
    if (!v.is_string()) throw Error(ErrorCode::parse_error, std::string("field '") + name + "' must be a string");
    return v.template get<std::string>();
}

template <class Json>
std::int64_t int_field(const Json& j, const char* name) {
    const auto& v = field(j, name);
    if (!v.is_number_integer()) {
        throw Error(ErrorCode::parse_error, std::string("field '") + name + "' must be an integer");
    }
    return v.template get<std::int64_t>();
}

}  // namespace detail

template <class Json>
QueryEvent query_event_from_json(const Json& j) {
    QueryEvent e;
    e.session_id = detail::string_field(j, "session_id");
    e.timestamp_ms = detail::int_field(j, "timestamp_ms");
    const auto& prev = detail::field(j, "previous_query");
    if (!prev.is_null()) {
        if (!prev.is_string()) throw Error(ErrorCode::parse_error, "field 'previous_query' must be a string or null");
        e.previous_query = prev.template get<std::string>();
    }
    e.query = detail::string_field(j, "query");
    e.source = query_source_from_string(detail::string_field(j, "source"));
    e.log_name = detail::string_field(j, "log_name");
    return e;
}

template <class Json>
ResultRecord result_record_from_json(const Json& j) {
    ResultRecord r;
    r.session_id = detail::string_field(j, "session_id");
    r.timestamp_ms = detail::int_field(j, "timestamp_ms");
    r.query = detail::string_field(j, "query");
    r.pipeline = detail::string_field(j, "pipeline");
    const auto& arr = detail::field(j, "results");
    if (!arr.is_array()) throw Error(ErrorCode::parse_error, "field 'results' must be an array");
    for (const auto& item : arr) {
        ResultEntry e;
        e.docno = detail::string_field(item, "docno");
        e.rank = detail::int_field(item, "rank");
        const auto& score = detail::field(item, "score");
        if (!score.is_number()) throw Error(ErrorCode::parse_error, "field 'score' must be a number");
        e.score = score.template get<double>();
        r.results.push_back(std::move(e));
    }
    return r;
}

template <class Json>
AnnotationRecord annotation_from_json(const Json& j) {
    AnnotationRecord a;
    a.session_id = detail::string_field(j, "session_id");
    a.timestamp_ms = detail::int_field(j, "timestamp_ms");
    a.query = detail::string_field(j, "query");
    a.docno = detail::string_field(j, "docno");
    a.grade = static_cast<int>(detail::int_field(j, "grade"));
    return a;
}

enum class LinkStatus { ok, chain_break };

inline std::string_view to_string(LinkStatus s) noexcept { return s == LinkStatus::ok ? "OK" : "BREAK"; }

struct LineageEntry {
    QueryEvent event;
    LinkStatus status = LinkStatus::ok;
};

/// Labels each transition of an already-ordered event sequence. The head is
/// always OK; a later event is OK iff its previous_query equals the prior
/// event's query.
inline std::vector<LineageEntry> label_lineage(std::vector<QueryEvent> events) {
    std::vector<LineageEntry> out;
    out.reserve(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
        auto status = LinkStatus::ok;
        if (i > 0 && events[i].previous_query != std::optional<std::string>(out.back().event.query)) {
            status = LinkStatus::chain_break;
        }
        out.push_back({std::move(events[i]), status});
    }
    return out;
}

inline std::string generate_session_id() {
    static thread_local std::mt19937_64 rng{[] {
        std::random_device rd;
        std::seed_seq seq{rd(), rd(), rd(), rd(), rd(), rd(), rd(), rd()};
        return std::mt19937_64(seq);
    }()};
    std::uniform_int_distribution<std::uint64_t> dist;
    std::uint64_t hi = dist(rng);
    std::uint64_t lo = dist(rng);
    // RFC 4122 version 4, variant 1.
    hi = (hi & 0xFFFFFFFFFFFF0FFFULL) | 0x0000000000004000ULL;
    lo = (lo & 0x3FFFFFFFFFFFFFFFULL) | 0x8000000000000000ULL;
    char buf[37];
    std::snprintf(buf, sizeof buf, "%08x-%04x-%04x-%04x-%012llx", static_cast<unsigned>(hi >> 32),
                  static_cast<unsigned>((hi >> 16) & 0xFFFF), static_cast<unsigned>(hi & 0xFFFF),
                  static_cast<unsigned>(lo >> 48), static_cast<unsigned long long>(lo & 0xFFFFFFFFFFFFULL));
    return buf;
}

/// One append-only JSONL file with a single serialized writer.
class JsonlAppender {
public:
    JsonlAppender(std::filesystem::path path, bool sync) : path_(std::move(path)), sync_(sync) {
        file_ = std::fopen(path_.c_str(), "ab");
        if (!file_) throw Error(ErrorCode::io_error, "cannot open log for append: " + path_.string());
    }
    JsonlAppender(const JsonlAppender&) = delete;
    JsonlAppender& operator=(const JsonlAppender&) = delete;
    ~JsonlAppender() {
        if (file_) std::fclose(file_);
    }

    const std::filesystem::path& path() const noexcept { return path_; }

    void append(const std::string& line) {
        std::lock_guard lock(mutex_);
        std::string buf = line;
        buf.push_back('\n');
        if (std::fwrite(buf.data(), 1, buf.size(), file_) != buf.size() || std::fflush(file_) != 0) {
            throw Error(ErrorCode::io_error, "append failed: " + path_.string());
        }
        if (sync_ && ::fsync(::fileno(file_)) != 0) {
            throw Error(ErrorCode::io_error, "fsync failed: " + path_.string());
        }
    }

private:
    std::filesystem::path path_;
    bool sync_;
    std::FILE* file_ = nullptr;
    std::mutex mutex_;
};

/// Reads a JSONL file; a missing file reads as empty. Corrupt lines are
/// reported with their byte offset.
inline std::vector<ojson> read_jsonl(const std::filesystem::path& path) {
    std::vector<ojson> records;
    std::ifstream in(path, std::ios::binary);
    if (!in) return records;
    std::string line;
    std::uint64_t offset = 0;
    while (std::getline(in, line)) {
        const bool terminated = !in.eof();
        if (!line.empty()) {
            try {
                records.push_back(ojson::parse(line));
            } catch (const nlohmann::json::parse_error& e) {
                throw Error(ErrorCode::parse_error, path.string() + ": corrupt record at byte offset " +
                                                        std::to_string(offset) + " (" + e.what() + ")");
            }
        }
        offset += line.size() + (terminated ? 1 : 0);
    }
    return records;
}

class SessionLog {
public:
    struct Options {
        bool fsync = true;
        Clock clock = system_clock_ms;
    };

    explicit SessionLog(std::filesystem::path dir) : SessionLog(std::move(dir), Options{}) {}

    SessionLog(std::filesystem::path dir, Options options) : dir_(std::move(dir)), clock_(std::move(options.clock)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw Error(ErrorCode::io_error, "cannot create log directory " + dir_.string() + ": " + ec.message());
        replay_existing();
        queries_ = std::make_unique<JsonlAppender>(path(LogStream::queries), options.fsync);
        results_ = std::make_unique<JsonlAppender>(path(LogStream::results), options.fsync);
        annotations_ = std::make_unique<JsonlAppender>(path(LogStream::annotations), options.fsync);
    }

    const std::filesystem::path& directory() const noexcept { return dir_; }
    std::filesystem::path path(LogStream s) const { return dir_ / log_file_name(s); }

    Session new_session() {
        ensure_storage();
        std::lock_guard lock(state_mutex_);
        std::string id;
        do {
            id = generate_session_id();
        } while (sessions_.count(id) != 0);
        const auto now = clock_();
        sessions_.emplace(id, SessionState{now, now, std::nullopt});
        return {id, now};
    }

    bool has_session(const std::string& session_id) const {
        std::lock_guard lock(state_mutex_);
        return sessions_.count(session_id) != 0;
    }

    /// Most recent query recorded for the session, if any.
    std::optional<std::string> last_query(const std::string& session_id) const {
        std::lock_guard lock(state_mutex_);
        const auto it = sessions_.find(session_id);
        if (it == sessions_.end()) return std::nullopt;
        return it->second.last_query;
    }

    /// Appends one query-log event. A previous_query that does not match the
    /// session's last query is stored as given and shows up as a BREAK in
    /// lineage().
    QueryEvent on_query_change(const Session& session, std::string_view log_name,
                               std::optional<std::string> previous_query, std::string query, QuerySource source) {
        if (is_blank(query)) throw Error(ErrorCode::invalid_argument, "query must be non-empty");
        // Ordering lock spans timestamp assignment and the append so the file
        // order matches per-session timestamp order.
        std::lock_guard order(append_order_mutex_);
        QueryEvent e{session.session_id, next_timestamp(session), std::move(previous_query), std::move(query), source,
                     std::string(log_name)};
        queries_->append(to_json(e).dump());
        std::lock_guard lock(state_mutex_);
        sessions_[e.session_id].last_query = e.query;
        return e;
    }

    ResultRecord record_results(const Session& session, std::string query, std::string pipeline,
                                std::span<const ScoredDoc> results) {
        std::vector<ResultEntry> entries;
        entries.reserve(results.size());
        for (std::size_t i = 0; i < results.size(); ++i) {
            if (results[i].rank != i + 1) {
                throw Error(ErrorCode::invalid_argument, "result ranks must be 1..n without gaps");
            }
            entries.push_back({results[i].docno, static_cast<std::int64_t>(results[i].rank), results[i].score});
        }
        std::lock_guard order(append_order_mutex_);
        ResultRecord r{session.session_id, next_timestamp(session), std::move(query), std::move(pipeline),
                       std::move(entries)};
        results_->append(to_json(r).dump());
        return r;
    }

    AnnotationRecord record_annotation(const Session& session, std::string query, std::string docno, int grade) {
        if (grade < kMinGrade || grade > kMaxGrade) {
            throw Error(ErrorCode::invalid_argument, "grade " + std::to_string(grade) + " outside [" +
                                                         std::to_string(kMinGrade) + "," + std::to_string(kMaxGrade) +
                                                         "]");
        }
        if (docno.empty()) throw Error(ErrorCode::invalid_argument, "docno must be non-empty");
        std::lock_guard order(append_order_mutex_);
        AnnotationRecord a{session.session_id, next_timestamp(session), std::move(query), std::move(docno), grade};
        annotations_->append(to_json(a).dump());
        return a;
    }

    std::vector<ojson> read_log(LogStream stream) const { return read_jsonl(path(stream)); }

    std::vector<QueryEvent> read_queries() const { return read_typed(LogStream::queries, query_event_from_json<ojson>); }
    std::vector<ResultRecord> read_results() const {
        return read_typed(LogStream::results, result_record_from_json<ojson>);
    }
    std::vector<AnnotationRecord> read_annotations() const {
        return read_typed(LogStream::annotations, annotation_from_json<ojson>);
    }

    /// Latest grade per (session_id, query, docno).
    std::map<std::tuple<std::string, std::string, std::string>, int> latest_annotations() const {
        std::map<std::tuple<std::string, std::string, std::string>, int> view;
        for (const auto& a : read_annotations()) view[{a.session_id, a.query, a.docno}] = a.grade;
        return view;
    }

    /// Session events ordered by timestamp then append order, each labeled
    /// OK or BREAK against its predecessor.
    std::vector<LineageEntry> lineage(const std::string& session_id) const {
        std::vector<QueryEvent> events;
        for (auto& e : read_queries()) {
            if (e.session_id == session_id) events.push_back(std::move(e));
        }
        std::stable_sort(events.begin(), events.end(),
                         [](const QueryEvent& a, const QueryEvent& b) { return a.timestamp_ms < b.timestamp_ms; });
        return label_lineage(std::move(events));
    }

private:
    struct SessionState {
        std::int64_t created_at = 0;
        std::int64_t last_timestamp = 0;
        std::optional<std::string> last_query;
    };

    template <class Parse>
    std::vector<std::invoke_result_t<Parse, const ojson&>> read_typed(LogStream stream, Parse parse) const {
        std::vector<std::invoke_result_t<Parse, const ojson&>> out;
        const auto raw = read_log(stream);
        out.reserve(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i) {
            try {
                out.push_back(parse(raw[i]));
            } catch (const Error& e) {
                throw Error(ErrorCode::parse_error,
                            path(stream).string() + ": record " + std::to_string(i + 1) + ": " + e.what());
            }
        }
        return out;
    }

    // Timestamps never go backwards within a session.
    std::int64_t next_timestamp(const Session& session) {
        std::lock_guard lock(state_mutex_);
        auto& state = sessions_[session.session_id];
        if (state.created_at == 0) state.created_at = session.created_at;
        const auto ts = std::max({clock_(), state.last_timestamp, session.created_at});
        state.last_timestamp = ts;
        return ts;
    }

    void ensure_storage() const {
        for (const auto s : kAllStreams) {
            std::error_code ec;
            if (!std::filesystem::is_regular_file(path(s), ec)) {
                throw Error(ErrorCode::io_error, "log storage unavailable: " + path(s).string());
            }
        }
    }

    void replay_existing() {
        const auto touch = [&](const std::string& id, std::int64_t ts) -> SessionState& {
            auto& st = sessions_[id];
            if (st.created_at == 0 || ts < st.created_at) st.created_at = ts;
            st.last_timestamp = std::max(st.last_timestamp, ts);
            return st;
        };
        for (const auto& e : read_queries()) touch(e.session_id, e.timestamp_ms).last_query = e.query;
        for (const auto& r : read_results()) touch(r.session_id, r.timestamp_ms);
        for (const auto& a : read_annotations()) touch(a.session_id, a.timestamp_ms);
    }

    std::filesystem::path dir_;
    Clock clock_;
    mutable std::mutex state_mutex_;
    std::mutex append_order_mutex_;
    std::unordered_map<std::string, SessionState> sessions_;
    std::unique_ptr<JsonlAppender> queries_;
    std::unique_ptr<JsonlAppender> results_;
    std::unique_ptr<JsonlAppender> annotations_;
};

}  // namespace qx
