#include "wsclass/prompt_template.hpp"

#include "wsclass/error.hpp"

namespace wsclass {

std::string to_string(SlotKind kind) {
    return kind == SlotKind::Label ? "label" : "mask";
}

SlotKind slot_kind_from_string(const std::string& s) {
    if (s == "label") return SlotKind::Label;
    if (s == "mask") return SlotKind::Mask;
    throw_config("unknown slot_kind '" + s + "' (expected 'label' or 'mask')");
}

namespace {

std::size_t count_occurrences(const std::string& s, const std::string& needle) {
    std::size_t count = 0;
    for (std::size_t pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1))
        ++count;
    return count;
}

}  // namespace

PromptTemplate::PromptTemplate(std::string pattern, SlotKind kind)
    : pattern_(std::move(pattern)), kind_(kind) {
    if (count_occurrences(pattern_, "{doc}") != 1 || count_occurrences(pattern_, "{slot}") != 1)
        throw_config("template pattern must contain '{doc}' and '{slot}' exactly once: '" +
                     pattern_ + "'");
    const std::size_t doc_pos = pattern_.find("{doc}");
    const std::size_t slot_pos = pattern_.find("{slot}");
    slot_before_doc_ = slot_pos < doc_pos;
    const std::size_t first_pos = slot_before_doc_ ? slot_pos : doc_pos;
    const std::size_t first_len = slot_before_doc_ ? 6 : 5;
    const std::size_t second_pos = slot_before_doc_ ? doc_pos : slot_pos;
    const std::size_t second_len = slot_before_doc_ ? 5 : 6;
    prefix_ = pattern_.substr(0, first_pos);
    middle_ = pattern_.substr(first_pos + first_len, second_pos - (first_pos + first_len));
    suffix_ = pattern_.substr(second_pos + second_len);
}

TokenSequence render(const PromptTemplate& tmpl, const Document& doc, const std::string& filler,
                     const Tokenizer& tokenizer) {
    TokenSequence out;
    out.doc_id = doc.id;
    out.slot_text = filler;

    const auto prefix = tokenizer.tokenize(tmpl.prefix());
    const auto middle = tokenizer.tokenize(tmpl.middle());
    const auto suffix = tokenizer.tokenize(tmpl.suffix());
    // The mask symbol is a reserved piece, never re-tokenized.
    const bool filler_is_mask =
        tmpl.slot_kind() == SlotKind::Mask && filler == tokenizer.mask_token();
    const std::vector<std::string> filler_tokens =
        filler_is_mask ? std::vector<std::string>{filler} : tokenizer.tokenize(filler);
    if (filler_tokens.empty()) throw_data("slot filler tokenizes to nothing: '" + filler + "'");

    auto doc_tokens = tokenizer.tokenize(doc.text);
    out.doc_tokens_total = doc_tokens.size();

    const std::size_t fixed = prefix.size() + middle.size() + suffix.size() + filler_tokens.size();
    const std::size_t window = tokenizer.max_sequence_tokens();
    if (fixed >= window)
        throw_data("template and filler consume the whole encoder window (" +
                   std::to_string(fixed) + " >= " + std::to_string(window) + " tokens); doc '" +
                   doc.id + "' would be empty");
    const std::size_t budget = window - fixed;
    if (doc_tokens.size() > budget) doc_tokens.resize(budget);
    out.doc_tokens_kept = doc_tokens.size();

    auto append = [&out](const std::vector<std::string>& part) {
        out.tokens.insert(out.tokens.end(), part.begin(), part.end());
    };
    append(prefix);
    if (tmpl.slot_before_doc()) {
        out.slot.begin = out.tokens.size();
        append(filler_tokens);
        out.slot.end = out.tokens.size();
        append(middle);
        append(doc_tokens);
    } else {
        append(doc_tokens);
        append(middle);
        out.slot.begin = out.tokens.size();
        append(filler_tokens);
        out.slot.end = out.tokens.size();
    }
    append(suffix);
    return out;
}

}  // namespace wsclass
