#include <doctest.h>

#include <string>
#include <vector>

#include "wsclass/error.hpp"
#include "wsclass/prompt_template.hpp"
#include "wsclass/tokenizer.hpp"

using namespace wsclass;

TEST_CASE("split_words lowercases and strips punctuation") {
    CHECK(split_words("It is to die for!") ==
          std::vector<std::string>{"it", "is", "to", "die", "for"});
    CHECK(split_words("  spaced\tout\nlines ") == std::vector<std::string>{"spaced", "out", "lines"});
    CHECK(split_words("don't stop") == std::vector<std::string>{"don't", "stop"});
    CHECK(split_words("...") == std::vector<std::string>{});
}

TEST_CASE("wordpiece splits by greedy longest vocabulary prefix") {
    WordPieceTokenizer tok({"un", "break", "able", "break", "fast"}, 64);
    CHECK(tok.tokenize("unbreakable") == std::vector<std::string>{"un", "break", "able"});
    CHECK(tok.tokenize("breakfast") == std::vector<std::string>{"break", "fast"});
    // No vocabulary prefix at all falls back to single characters.
    CHECK(tok.tokenize("zz") == std::vector<std::string>{"z", "z"});
}

TEST_CASE("template pattern must contain each placeholder exactly once") {
    CHECK_NOTHROW(PromptTemplate("{doc} It was {slot}.", SlotKind::Label));
    CHECK_THROWS_AS(PromptTemplate("{doc} only", SlotKind::Label), Error);
    CHECK_THROWS_AS(PromptTemplate("{slot} only", SlotKind::Label), Error);
    CHECK_THROWS_AS(PromptTemplate("{doc} {slot} {slot}", SlotKind::Label), Error);
    CHECK_THROWS_AS(PromptTemplate("no placeholders", SlotKind::Mask), Error);
}

TEST_CASE("render fills the slot after the document") {
    BasicTokenizer tok(64);
    const PromptTemplate tmpl("{doc} It was {slot}.", SlotKind::Label);
    const Document doc{"d1", "It is to die for!"};

    const TokenSequence good = render(tmpl, doc, "good", tok);
    CHECK(good.tokens == std::vector<std::string>{"it", "is", "to", "die", "for", "it", "was",
                                                  "good"});
    CHECK(good.slot.begin == 7);
    CHECK(good.slot.end == 8);
    CHECK(good.slot_text == "good");
    CHECK_FALSE(good.truncated());

    const TokenSequence bad = render(tmpl, doc, "bad", tok);
    CHECK(bad.tokens.back() == "bad");
    CHECK(bad.tokens.size() == good.tokens.size());
}

TEST_CASE("render supports slot before document and mask fillers") {
    BasicTokenizer tok(64);
    const PromptTemplate tmpl("{slot} News: {doc}", SlotKind::Mask);
    const Document doc{"d2", "markets rallied today"};
    const TokenSequence seq = render(tmpl, doc, tok.mask_token(), tok);
    // The mask symbol is one reserved piece even though it contains brackets.
    CHECK(seq.tokens == std::vector<std::string>{"[MASK]", "news", "markets", "rallied", "today"});
    CHECK(seq.slot.begin == 0);
    CHECK(seq.slot.end == 1);
}

TEST_CASE("render truncates document tokens only, from the right") {
    BasicTokenizer tok(6);  // room for 3 doc tokens after "it was good"
    const PromptTemplate tmpl("{doc} It was {slot}.", SlotKind::Label);
    const Document doc{"d3", "one two three four five six"};
    const TokenSequence seq = render(tmpl, doc, "good", tok);
    CHECK(seq.truncated());
    CHECK(seq.doc_tokens_total == 6);
    CHECK(seq.doc_tokens_kept == 3);
    CHECK(seq.tokens == std::vector<std::string>{"one", "two", "three", "it", "was", "good"});
    CHECK(seq.tokens[seq.slot.begin] == "good");
}

TEST_CASE("render rejects a window too small for any document token") {
    BasicTokenizer tok(3);  // "it was good" alone fills the window
    const PromptTemplate tmpl("{doc} It was {slot}.", SlotKind::Label);
    CHECK_THROWS_AS(render(tmpl, {"d4", "hello"}, "good", tok), Error);
}

TEST_CASE("multi piece fillers keep their full span") {
    WordPieceTokenizer tok({"it", "was", "very", "tasty", "deli", "cious"}, 16);
    const PromptTemplate tmpl("{doc} It was {slot}.", SlotKind::Label);
    const TokenSequence seq = render(tmpl, {"d5", "very tasty"}, "delicious", tok);
    CHECK(seq.slot.size() == 2);
    CHECK(seq.tokens[seq.slot.begin] == "deli");
    CHECK(seq.tokens[seq.slot.begin + 1] == "cious");
}

TEST_CASE("slot kind round trips through strings") {
    CHECK(to_string(SlotKind::Label) == "label");
    CHECK(to_string(SlotKind::Mask) == "mask");
    CHECK(slot_kind_from_string("label") == SlotKind::Label);
    CHECK(slot_kind_from_string("mask") == SlotKind::Mask);
    CHECK_THROWS_AS(slot_kind_from_string("other"), Error);
}
