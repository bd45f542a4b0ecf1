#include "wsclass/tokenizer.hpp"

#include <cctype>

namespace wsclass {

std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> words;
    std::string current;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c == '\'') {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            words.push_back(current);
            current.clear();
        }
    }
    if (!current.empty()) words.push_back(current);
    return words;
}

std::vector<std::string> BasicTokenizer::tokenize(const std::string& text) const {
    return split_words(text);
}

std::vector<std::string> WordPieceTokenizer::split_word(const std::string& word) const {
    std::vector<std::string> pieces;
    std::size_t pos = 0;
    while (pos < word.size()) {
        std::size_t len = word.size() - pos;
        while (len > 0 && vocab_.find(word.substr(pos, len)) == vocab_.end()) --len;
        if (len == 0) len = 1;  // character fallback for out-of-vocabulary text
        pieces.push_back(word.substr(pos, len));
        pos += len;
    }
    return pieces;
}

std::vector<std::string> WordPieceTokenizer::tokenize(const std::string& text) const {
    std::vector<std::string> pieces;
    for (const auto& word : split_words(text)) {
        auto split = split_word(word);
        pieces.insert(pieces.end(), split.begin(), split.end());
    }
    return pieces;
}

}  // namespace wsclass
