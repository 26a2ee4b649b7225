// qx: build indexes, serve the API, export logs, and run headless QBE batches.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qx/qx.hpp"
#include "qx/http_server.hpp"

namespace {

httplib::Server* g_server = nullptr;

void stop_server(int) {
    if (g_server) g_server->stop();
}

std::string default_log_dir() { return qx::env_var("QX_LOG_DIR").value_or("logs"); }

qx::GeneratorConfig generator_from_flag(const std::string& kind, qx::GeneratorConfig base) {
    base.kind = qx::generator_kind_from_string(kind);
    if (base.kind == qx::GeneratorKind::http_endpoint) {
        base.endpoint_url = qx::env_var("QX_GENERATOR_URL");
        if (!base.endpoint_url) throw qx::Error(qx::ErrorCode::invalid_argument, "--generator http needs QX_GENERATOR_URL");
    }
    return base;
}

int run_index(const std::string& corpus_path, const std::string& out_dir) {
    const auto corpus = qx::ingest_corpus(corpus_path);
    const auto index = qx::InvertedIndex::build(corpus);
    index.save(out_dir);
    std::cout << index.manifest().dump(2) << '\n';
    return 0;
}

int run_serve(const std::string& index_dir, const std::string& host, int port, const std::string& log_dir,
              const std::string& generator, const std::string& settings_path, const std::string& static_dir) {
    auto index = std::make_shared<const qx::InvertedIndex>(qx::InvertedIndex::load(index_dir));
    auto registry = std::make_shared<qx::PipelineRegistry>();
    qx::Settings settings;
    if (!settings_path.empty()) settings = qx::load_settings_file(settings_path, *registry);
    settings.generator = generator_from_flag(generator, settings.generator);
    auto log = std::make_shared<qx::SessionLog>(log_dir);
    qx::Service service(index, registry, log, settings);

    httplib::Server server;
    qx::mount_api(server, service, static_dir);
    g_server = &server;
    std::signal(SIGINT, stop_server);
    std::signal(SIGTERM, stop_server);
    if (!server.bind_to_port(host, port)) {
        std::cerr << "qx serve: cannot bind " << host << ":" << port << '\n';
        return 1;
    }
    std::cerr << "qx serve: listening on http://" << host << ":" << port << " (" << index->num_docs()
              << " documents, logs in " << log_dir << ")\n";
    server.listen_after_bind();
    g_server = nullptr;
    return 0;
}

int run_export(const std::string& log_dir, const std::string& format, const std::string& out_path) {
    if (!std::filesystem::is_directory(log_dir)) {
        throw qx::Error(qx::ErrorCode::io_error, "log directory not found: " + log_dir);
    }
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw qx::Error(qx::ErrorCode::io_error, "cannot write " + out_path);
    if (format == "jsonl") {
        qx::export_logs_jsonl(log_dir, out);
    } else {
        qx::export_logs_csv(log_dir, out);
    }
    out.flush();
    if (!out) throw qx::Error(qx::ErrorCode::io_error, "write failed: " + out_path);
    return 0;
}

int run_batch(const std::string& index_dir, const std::string& docs_path, const std::string& generator,
              const std::string& out_path, std::size_t k, std::size_t num_candidates, std::int64_t seed,
              const std::string& pipeline, const std::string& settings_path) {
    auto index = std::make_shared<const qx::InvertedIndex>(qx::InvertedIndex::load(index_dir));
    const qx::PipelineRegistry registry;
    qx::Settings settings;
    if (!settings_path.empty()) settings = qx::load_settings_file(settings_path, registry);
    auto config = generator_from_flag(generator, settings.generator);
    config.num_candidates = num_candidates;
    config.seed = seed;
    const auto examples = qx::ingest_corpus(docs_path);
    auto gen = qx::make_generator(config, index);
    const auto records =
        qx::run_batch_qbe(*index, examples, *gen, config, settings.qg_template, registry.lookup(pipeline), k);

    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw qx::Error(qx::ErrorCode::io_error, "cannot write " + out_path);
    qx::write_batch_jsonl(out, records);
    out.flush();
    if (!out) throw qx::Error(qx::ErrorCode::io_error, "write failed: " + out_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qx - interactive query-by-example search workbench"};
    app.require_subcommand(1);

    std::string corpus_path, out_dir;
    auto* index_cmd = app.add_subcommand("index", "Build an index directory from a JSONL corpus");
    index_cmd->add_option("--corpus", corpus_path, "JSONL corpus (docno, text, [lang, title])")->required();
    index_cmd->add_option("--out", out_dir, "Output index directory")->required();

    std::string serve_index, host = "127.0.0.1", log_dir = default_log_dir(), generator = "stub", settings_path,
                             static_dir;
    int port = 8080;
    auto* serve_cmd = app.add_subcommand("serve", "Serve the JSON API over HTTP");
    serve_cmd->add_option("--index", serve_index, "Index directory")->required();
    serve_cmd->add_option("--port", port, "Listen port")->capture_default_str()->check(CLI::Range(1, 65535));
    serve_cmd->add_option("--host", host, "Listen address")->capture_default_str();
    serve_cmd->add_option("--log-dir", log_dir, "Interaction log directory (env QX_LOG_DIR)")->capture_default_str();
    serve_cmd->add_option("--generator", generator, "Text generator")
        ->capture_default_str()
        ->check(CLI::IsMember({"stub", "http"}));
    serve_cmd->add_option("--settings", settings_path, "Initial settings JSON");
    serve_cmd->add_option("--static-dir", static_dir, "Directory served under /");

    std::string export_dir = default_log_dir(), format = "jsonl", export_out;
    auto* export_cmd = app.add_subcommand("export-logs", "Export interaction logs");
    export_cmd->add_option("--log-dir", export_dir, "Interaction log directory (env QX_LOG_DIR)")->capture_default_str();
    export_cmd->add_option("--format", format, "Output format")->capture_default_str()->check(CLI::IsMember({"jsonl", "csv"}));
    export_cmd->add_option("--out", export_out, "Output file")->required();

    std::string batch_index, docs_path, batch_generator = "stub", batch_out, pipeline = "BM25", batch_settings;
    std::size_t k = qx::kDefaultTopK, num_candidates = qx::kDefaultNumCandidates;
    std::int64_t seed = 7;
    auto* batch_cmd = app.add_subcommand("batch-qbe", "Generate queries for example documents and retrieve");
    batch_cmd->add_option("--index", batch_index, "Index directory")->required();
    batch_cmd->add_option("--docs", docs_path, "JSONL example documents")->required();
    batch_cmd->add_option("--generator", batch_generator, "Text generator")
        ->capture_default_str()
        ->check(CLI::IsMember({"stub", "http"}));
    batch_cmd->add_option("--out", batch_out, "Output JSONL")->required();
    batch_cmd->add_option("--k", k, "Documents retrieved per example")->capture_default_str()->check(CLI::PositiveNumber);
    batch_cmd->add_option("--num-candidates", num_candidates, "Candidates per example")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    batch_cmd->add_option("--seed", seed, "Stub generator seed")->capture_default_str();
    batch_cmd->add_option("--pipeline", pipeline, "Retrieval pipeline")->capture_default_str();
    batch_cmd->add_option("--settings", batch_settings, "Settings JSON (prompt template)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*index_cmd) return run_index(corpus_path, out_dir);
        if (*serve_cmd) return run_serve(serve_index, host, port, log_dir, generator, settings_path, static_dir);
        if (*export_cmd) return run_export(export_dir, format, export_out);
        if (*batch_cmd) {
            return run_batch(batch_index, docs_path, batch_generator, batch_out, k, num_candidates, seed, pipeline,
                             batch_settings);
        }
    } catch (const std::exception& e) {
        std::cerr << "qx: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
