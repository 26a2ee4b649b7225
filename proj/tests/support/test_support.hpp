#pragma once

#include <unistd.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qx/corpus.hpp"
#include "qx/generation.hpp"
#include "qx/index.hpp"

namespace qx::testing {

inline std::filesystem::path data_dir() { return QX_TEST_DATA_DIR; }

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("qx-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" +
                 std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path_);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << content;
}

inline Corpus corpus_of(std::initializer_list<std::pair<const char*, const char*>> docs) {
    Corpus c;
    for (const auto& [docno, text] : docs) c.documents.push_back({docno, text, "eng", std::nullopt});
    return c;
}

inline std::shared_ptr<const InvertedIndex> load_fixture_index(const std::string& name) {
    return std::make_shared<const InvertedIndex>(InvertedIndex::build(ingest_corpus(data_dir() / name)));
}

/// Replays canned outputs in order (the last one repeats) and records prompts.
class ScriptedGenerator final : public TextGenerator {
public:
    explicit ScriptedGenerator(std::vector<std::vector<std::string>> outputs) : outputs_(std::move(outputs)) {}

    std::vector<std::string> complete(const std::string& prompt, const GenerationParams&) override {
        prompts.push_back(prompt);
        if (fail) throw Error(ErrorCode::generator_error, "scripted failure");
        if (outputs_.empty()) return {};
        const auto i = std::min(calls++, outputs_.size() - 1);
        return outputs_[i];
    }

    std::vector<std::string> prompts;
    bool fail = false;

private:
    std::vector<std::vector<std::string>> outputs_;
    std::size_t calls = 0;
};

}  // namespace qx::testing
