#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "bridge/corpus.hpp"

namespace bridge::testutil {

// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("bridge_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return content;
}

inline Corpus make_corpus(const std::vector<std::pair<std::string, std::string>>& docs,
                          const std::string& domain = "test") {
    Corpus corpus;
    for (const auto& [id, text] : docs) {
        Document doc;
        doc.doc_id = id;
        doc.domain = domain;
        doc.text = text;
        corpus.add(std::move(doc));
    }
    return corpus;
}

}  // namespace bridge::testutil
