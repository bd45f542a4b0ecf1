#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "wsclass/tokenizer.hpp"
#include "wsclass/types.hpp"

namespace wsclass {

enum class SlotKind {
    Label,  // discriminative: slot filled with each label name in turn
    Mask,   // generative: slot filled with the mask symbol
};

std::string to_string(SlotKind kind);
SlotKind slot_kind_from_string(const std::string& s);

// Pattern with exactly one "{doc}" and exactly one "{slot}" placeholder,
// e.g. "{doc} It was {slot}." or "{slot} News: {doc}".
class PromptTemplate {
public:
    PromptTemplate() = default;
    PromptTemplate(std::string pattern, SlotKind kind);

    const std::string& pattern() const { return pattern_; }
    SlotKind slot_kind() const { return kind_; }

    // Pattern text before/after each placeholder, in placeholder order.
    bool slot_before_doc() const { return slot_before_doc_; }
    const std::string& prefix() const { return prefix_; }   // before first placeholder
    const std::string& middle() const { return middle_; }   // between the two
    const std::string& suffix() const { return suffix_; }   // after second placeholder

private:
    std::string pattern_;
    SlotKind kind_ = SlotKind::Label;
    bool slot_before_doc_ = false;
    std::string prefix_, middle_, suffix_;
};

// Token index range [begin, end) of the slot content in a rendered sequence.
struct SlotSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const { return end - begin; }
};

struct TokenSequence {
    DocId doc_id;
    std::vector<std::string> tokens;
    SlotSpan slot;              // span of the filler (label pieces or mask)
    std::string slot_text;      // the filler as given
    std::size_t doc_tokens_kept = 0;
    std::size_t doc_tokens_total = 0;
    bool truncated() const { return doc_tokens_kept < doc_tokens_total; }
};

// Tokenizes the template with the document and filler. The document is
// truncated from the right so template and filler tokens always survive;
// throws when the window leaves no room for any document token.
TokenSequence render(const PromptTemplate& tmpl, const Document& doc, const std::string& filler,
                     const Tokenizer& tokenizer);

}  // namespace wsclass
