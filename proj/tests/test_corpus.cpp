#include <doctest.h>

#include <string>
#include <vector>

#include "helpers.hpp"
#include "wsclass/corpus.hpp"
#include "wsclass/error.hpp"

using namespace wsclass;
using testutil::TempDir;

TEST_CASE("normalize_whitespace collapses runs and trims") {
    CHECK(normalize_whitespace("  a  b\t\nc  ") == "a b c");
    CHECK(normalize_whitespace("plain") == "plain");
    CHECK(normalize_whitespace("\r\n\t ") == "");
    CHECK(normalize_whitespace("a\fb\vc") == "a b c");
}

namespace {

Dataset load_text(const std::string& jsonl, const TempDir& dir) {
    const std::string path = dir.file("corpus.jsonl");
    testutil::write_file(path, jsonl);
    BasicTokenizer tok(64);
    return load_corpus(path, FormatSpec{}, {{"good", "good"}, {"bad", "bad"}},
                       testutil::label_template(), tok);
}

}  // namespace

TEST_CASE("load_corpus reads documents, ids and gold labels") {
    TempDir dir("corpus");
    const Dataset ds = load_text(
        "{\"id\": \"a\", \"text\": \"nice place\", \"label\": \"good\"}\n"
        "{\"id\": \"b\", \"text\": \"bad  service\"}\n",
        dir);
    CHECK(ds.corpus.size() == 2);
    CHECK(ds.corpus.find("a")->text == "nice place");
    CHECK(ds.corpus.find("b")->text == "bad service");
    CHECK(ds.gold.size() == 1);
    CHECK(ds.gold.at("a") == "good");
}

TEST_CASE("load_corpus assigns missing ids as ingestion indices") {
    TempDir dir("corpus");
    const Dataset ds = load_text(
        "{\"text\": \"first\"}\n"
        "\n"
        "{\"text\": \"second\"}\n"
        "{\"id\": 7, \"text\": \"third\"}\n",
        dir);
    CHECK(ds.corpus.documents()[0].id == "0");
    CHECK(ds.corpus.documents()[1].id == "1");
    CHECK(ds.corpus.documents()[2].id == "7");
}

TEST_CASE("load_corpus rejects malformed input with the line number") {
    TempDir dir("corpus");
    auto expect_line = [&](const std::string& jsonl, const std::string& line_tag) {
        try {
            load_text(jsonl, dir);
            FAIL("expected a data error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Data);
            CHECK(std::string(e.what()).find(line_tag) != std::string::npos);
        }
    };
    expect_line("{\"text\": \"ok\"}\nnot json\n", ":2");
    expect_line("{\"no_text\": 1}\n", ":1");
    expect_line("{\"text\": \"   \"}\n", ":1");
    expect_line("{\"text\": \"ok\"}\n{\"text\": \"x\", \"label\": \"meh\"}\n", ":2");
    expect_line("{\"id\": \"d\", \"text\": \"x\"}\n{\"id\": \"d\", \"text\": \"y\"}\n", ":2");
    expect_line("{\"text\": \"x\", \"extra\": 1}\n", ":1");
    expect_line("{\"text\": \"x\", \"id\": 1.5}\n", ":1");
}

TEST_CASE("load_corpus rejects missing files and unknown formats") {
    BasicTokenizer tok(64);
    CHECK_THROWS_AS(load_corpus("/nonexistent/corpus.jsonl", FormatSpec{},
                                {{"good", "good"}, {"bad", "bad"}}, testutil::label_template(),
                                tok),
                    Error);
    TempDir dir("corpus");
    testutil::write_file(dir.file("c.jsonl"), "{\"text\": \"x\"}\n");
    FormatSpec csv;
    csv.kind = "csv";
    CHECK_THROWS_AS(load_corpus(dir.file("c.jsonl"), csv, {{"good", "good"}, {"bad", "bad"}},
                                testutil::label_template(), tok),
                    Error);
}

TEST_CASE("corpus invariants are enforced at construction") {
    CHECK_THROWS_AS(Corpus({{"0", "x"}}, {{"solo", "solo", {"solo"}}}, testutil::label_template()),
                    Error);
    CHECK_THROWS_AS(Corpus({{"0", "x"}, {"0", "y"}}, testutil::two_classes(),
                           testutil::label_template()),
                    Error);
    CHECK_THROWS_AS(Corpus({{"0", ""}}, testutil::two_classes(), testutil::label_template()),
                    Error);
    std::vector<ClassSpec> dup = {{"c", "one", {"one"}}, {"c", "two", {"two"}}};
    CHECK_THROWS_AS(Corpus({{"0", "x"}}, dup, testutil::label_template()), Error);
}

TEST_CASE("find and find_class return null for unknown ids") {
    const Corpus corpus = testutil::make_corpus(testutil::alternating_docs(4));
    CHECK(corpus.find("2") != nullptr);
    CHECK(corpus.find("99") == nullptr);
    CHECK(corpus.find_class("good") != nullptr);
    CHECK(corpus.find_class("ugly") == nullptr);
    CHECK(corpus.has_class("bad"));
}

TEST_CASE("label name validation reports tokenization support per template kind") {
    WordPieceTokenizer tok({"sport", "s", "politics"}, 64);

    const Corpus label_corpus({{"0", "x"}},
                              {{"pol", "politics", {"politics"}}, {"spo", "sports", {"sport", "s"}}},
                              PromptTemplate("{doc} topic: {slot}", SlotKind::Label));
    const LabelNameReport label_report = validate_label_names(label_corpus, tok);
    CHECK_FALSE(label_report.any_unsupported());
    CHECK(label_report.entries[0].support == LabelNameSupport::SinglePiece);
    CHECK(label_report.entries[1].support == LabelNameSupport::SupportedViaAveraging);
    CHECK(label_report.entries[1].pieces == std::vector<std::string>{"sport", "s"});

    const Corpus mask_corpus({{"0", "x"}},
                             {{"pol", "politics", {"politics"}}, {"spo", "sports", {"sport", "s"}}},
                             PromptTemplate("{slot} topic: {doc}", SlotKind::Mask));
    const LabelNameReport mask_report = validate_label_names(mask_corpus, tok);
    CHECK(mask_report.any_unsupported());
    CHECK(mask_report.entries[1].support == LabelNameSupport::UnsupportedMask);
    CHECK(mask_report.to_text().find("UNSUPPORTED") != std::string::npos);
}
