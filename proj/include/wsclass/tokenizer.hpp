#pragma once

#include <cstddef>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace wsclass {

// Sub-token interface shared by label-name validation, prompt rendering and
// the desk-scale encoders. Real PLM backends bring their own tokenization
// behind the same surface.
class Tokenizer {
public:
    virtual ~Tokenizer() = default;

    // Sub-token pieces of a text span, in order.
    virtual std::vector<std::string> tokenize(const std::string& text) const = 0;

    virtual std::string mask_token() const { return "[MASK]"; }

    // Maximum tokens one rendered sequence may hold (the encoder window).
    virtual std::size_t max_sequence_tokens() const = 0;
};

// Lowercases and splits on whitespace/punctuation; every word is one piece.
class BasicTokenizer : public Tokenizer {
public:
    explicit BasicTokenizer(std::size_t window = 256) : window_(window) {}

    std::vector<std::string> tokenize(const std::string& text) const override;
    std::size_t max_sequence_tokens() const override { return window_; }

private:
    std::size_t window_;
};

// Greedy longest-prefix wordpiece over a fixed vocabulary. Words without any
// vocabulary prefix fall back to single characters, so a word can split into
// several pieces exactly the way sub-word PLM tokenizers split rare label
// names.
class WordPieceTokenizer : public Tokenizer {
public:
    WordPieceTokenizer(std::set<std::string> vocabulary, std::size_t window = 256)
        : vocab_(std::move(vocabulary)), window_(window) {}

    std::vector<std::string> tokenize(const std::string& text) const override;
    std::size_t max_sequence_tokens() const override { return window_; }

private:
    std::vector<std::string> split_word(const std::string& word) const;

    std::set<std::string> vocab_;
    std::size_t window_;
};

// The word-level split used by both tokenizers: lowercase, strip punctuation
// into separators.
std::vector<std::string> split_words(const std::string& text);

}  // namespace wsclass
