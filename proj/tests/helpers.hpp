#pragma once

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "wsclass/corpus.hpp"
#include "wsclass/selection.hpp"
#include "wsclass/types.hpp"

namespace testutil {

inline std::vector<wsclass::ClassSpec> two_classes() {
    return {{"good", "good", {"good"}}, {"bad", "bad", {"bad"}}};
}

inline wsclass::PromptTemplate label_template() {
    return wsclass::PromptTemplate("{doc} It was {slot}.", wsclass::SlotKind::Label);
}

inline wsclass::Corpus make_corpus(std::vector<wsclass::Document> docs,
                                   std::vector<wsclass::ClassSpec> classes = two_classes(),
                                   wsclass::PromptTemplate tmpl = label_template()) {
    return wsclass::Corpus(std::move(docs), std::move(classes), std::move(tmpl));
}

// n documents "0".."n-1", alternating class text cues.
inline std::vector<wsclass::Document> alternating_docs(std::size_t n) {
    std::vector<wsclass::Document> docs;
    for (std::size_t i = 0; i < n; ++i) {
        const bool pos = i % 2 == 0;
        docs.push_back({std::to_string(i),
                        pos ? "the food was great and the staff friendly"
                            : "the food was awful and the staff rude"});
    }
    return docs;
}

inline wsclass::GoldLabels alternating_gold(std::size_t n) {
    wsclass::GoldLabels gold;
    for (std::size_t i = 0; i < n; ++i) gold[std::to_string(i)] = i % 2 == 0 ? "good" : "bad";
    return gold;
}

struct PoolSpec {
    wsclass::DocId doc_id;
    wsclass::ClassId class_id;
    double confidence;
};

inline wsclass::PseudoLabelPool make_pool(int iteration, std::vector<PoolSpec> specs,
                                          double floor = 0.0) {
    wsclass::PseudoLabelPool pool;
    pool.iteration = iteration;
    pool.confidence_floor = floor;
    for (auto& s : specs) pool.entries[s.doc_id] = {s.class_id, s.confidence, "test"};
    return pool;
}

// Unique scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("wsclass_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string str() const { return path_.string(); }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

}  // namespace testutil
