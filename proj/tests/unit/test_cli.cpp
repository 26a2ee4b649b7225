#include <gtest/gtest.h>

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <thread>

#include "httplib.h"

#include "qx/session_log.hpp"
#include "test_support.hpp"

using qx::testing::TempDir;
namespace fs = std::filesystem;

namespace {

int run_qx(const std::string& args) {
    const std::string cmd = std::string("'") + QX_CLI_PATH + "' " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

fs::path build_index(const TempDir& dir, const std::string& fixture = "cricket.jsonl") {
    const auto out = dir / "index";
    EXPECT_EQ(run_qx("index --corpus " + q(qx::testing::data_dir() / fixture) + " --out " + q(out)), 0);
    return out;
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run_qx(""), 2);
    EXPECT_EQ(run_qx("frobnicate"), 2);
    EXPECT_EQ(run_qx("index --corpus x"), 2);
    EXPECT_EQ(run_qx("export-logs --out x --format xml"), 2);
    EXPECT_EQ(run_qx("--help"), 0);
}

TEST(Cli, IndexWritesManifest) {
    TempDir dir;
    qx::testing::write_file(dir / "c.jsonl", "{\"docno\":\"a\",\"text\":\"x y\"}\n{\"docno\":\"b\",\"text\":\"y z\"}\n"
                                               "{\"docno\":\"c\",\"text\":\"z\"}\n");
    ASSERT_EQ(run_qx("index --corpus " + q(dir / "c.jsonl") + " --out " + q(dir / "idx")), 0);
    const auto manifest = nlohmann::json::parse(qx::testing::read_file(dir / "idx" / "manifest.json"));
    EXPECT_EQ(manifest["num_docs"], 3);
}

TEST(Cli, IndexFailuresExitOne) {
    TempDir dir;
    EXPECT_EQ(run_qx("index --corpus " + q(dir / "missing.jsonl") + " --out " + q(dir / "idx")), 1);
    qx::testing::write_file(dir / "dup.jsonl", "{\"docno\":\"a\",\"text\":\"x\"}\n{\"docno\":\"a\",\"text\":\"y\"}\n");
    EXPECT_EQ(run_qx("index --corpus " + q(dir / "dup.jsonl") + " --out " + q(dir / "idx")), 1);
}

TEST(Cli, ServeWithBadIndexExitsOne) {
    TempDir dir;
    EXPECT_EQ(run_qx("serve --index " + q(dir / "nope") + " --port 1"), 1);
}

TEST(Cli, ServeHttpGeneratorWithoutUrlExitsOne) {
    TempDir dir;
    const auto idx = build_index(dir);
    ::unsetenv("QX_GENERATOR_URL");
    EXPECT_EQ(run_qx("serve --index " + q(idx) + " --generator http"), 1);
}

TEST(Cli, ExportJsonlAndCsv) {
    TempDir dir;
    {
        qx::SessionLog log(dir / "logs", {false, qx::system_clock_ms});
        const auto s = log.new_session();
        log.on_query_change(s, qx::kUserEditsLog, std::nullopt, "a, \"b\"", qx::QuerySource::user_edit);
        log.record_results(s, "a", "BM25", {});
        log.record_annotation(s, "a", "d1", 1);
    }
    ASSERT_EQ(run_qx("export-logs --log-dir " + q(dir / "logs") + " --format jsonl --out " + q(dir / "all.jsonl")), 0);
    std::string expected;
    for (const auto* name : {"queries.jsonl", "results.jsonl", "annotations.jsonl"}) {
        expected += qx::testing::read_file(dir / "logs" / name);
    }
    EXPECT_EQ(qx::testing::read_file(dir / "all.jsonl"), expected);

    ASSERT_EQ(run_qx("export-logs --log-dir " + q(dir / "logs") + " --format csv --out " + q(dir / "all.csv")), 0);
    const auto csv = qx::testing::read_file(dir / "all.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
    EXPECT_NE(csv.find("\"a, \"\"b\"\"\""), std::string::npos) << csv;
}

TEST(Cli, ExportEmptyAndMissing) {
    TempDir dir;
    { qx::SessionLog log(dir / "logs", {false, qx::system_clock_ms}); }
    ASSERT_EQ(run_qx("export-logs --log-dir " + q(dir / "logs") + " --format csv --out " + q(dir / "e.csv")), 0);
    const auto csv = qx::testing::read_file(dir / "e.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1);
    EXPECT_EQ(run_qx("export-logs --log-dir " + q(dir / "none") + " --out " + q(dir / "e.jsonl")), 1);
}

TEST(Cli, BatchQbeIsDeterministic) {
    TempDir dir;
    const auto idx = build_index(dir);
    const auto docs = qx::testing::data_dir() / "bowling5.jsonl";
    ASSERT_EQ(run_qx("batch-qbe --index " + q(idx) + " --docs " + q(docs) + " --out " + q(dir / "a.jsonl")), 0);
    ASSERT_EQ(run_qx("batch-qbe --index " + q(idx) + " --docs " + q(docs) + " --out " + q(dir / "b.jsonl")), 0);
    const auto a = qx::testing::read_file(dir / "a.jsonl");
    EXPECT_EQ(a, qx::testing::read_file(dir / "b.jsonl"));
    std::istringstream lines(a);
    std::string line;
    std::size_t n = 0;
    while (std::getline(lines, line)) {
        const auto j = nlohmann::json::parse(line);
        EXPECT_TRUE(j.contains("example_docno"));
        EXPECT_EQ(j["candidates"].size(), 3u);
        EXPECT_LE(j["retrieved"].size(), 10u);
        ++n;
    }
    EXPECT_EQ(n, 5u);
}

TEST(Cli, BatchQbeEmptyDocsAndBadPipeline) {
    TempDir dir;
    const auto idx = build_index(dir);
    qx::testing::write_file(dir / "empty.jsonl", "");
    ASSERT_EQ(run_qx("batch-qbe --index " + q(idx) + " --docs " + q(dir / "empty.jsonl") + " --out " + q(dir / "o.jsonl")),
              0);
    EXPECT_TRUE(qx::testing::read_file(dir / "o.jsonl").empty());
    EXPECT_EQ(run_qx("batch-qbe --index " + q(idx) + " --docs " + q(dir / "empty.jsonl") + " --out " +
                     q(dir / "o.jsonl") + " --pipeline DPR"),
              1);
}

TEST(Cli, ServeAnswersApiAndStopsOnSigint) {
    TempDir dir;
    const auto idx = build_index(dir);
    const int port = 20000 + static_cast<int>(::getpid() % 20000);
    const std::string port_text = std::to_string(port);
    const std::string idx_text = idx.string();
    const std::string log_text = (dir / "logs").string();
    const pid_t pid = ::fork();
    ASSERT_GE(pid, 0);
    if (pid == 0) {
        ::execl(QX_CLI_PATH, "qx", "serve", "--index", idx_text.c_str(), "--port", port_text.c_str(), "--log-dir",
                log_text.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }

    httplib::Client client("127.0.0.1", port);
    httplib::Result res;
    for (int attempt = 0; attempt < 100 && !res; ++attempt) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
        res = client.Get("/api/settings");
    }
    ASSERT_TRUE(res) << "server did not come up";
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(nlohmann::json::parse(res->body)["pipeline_name"], "BM25");
    const auto session = client.Post("/api/session", "", "application/json");
    ASSERT_TRUE(session);
    EXPECT_EQ(session->status, 200);

    ::kill(pid, SIGINT);
    int status = 0;
    ::waitpid(pid, &status, 0);
    EXPECT_TRUE(WIFEXITED(status));
    EXPECT_EQ(WEXITSTATUS(status), 0);
    EXPECT_TRUE(fs::exists(dir / "logs" / "queries.jsonl"));
}
