#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wsclass/prompt_template.hpp"
#include "wsclass/tokenizer.hpp"
#include "wsclass/types.hpp"

namespace wsclass {

// The document collection with its class set and prompt template. Gold
// labels never enter this type: the loader hands them back in a separate
// GoldLabels table so training and selection code cannot see them.
class Corpus {
public:
    Corpus(std::vector<Document> documents, std::vector<ClassSpec> classes, PromptTemplate tmpl);

    const std::vector<Document>& documents() const { return documents_; }
    const std::vector<ClassSpec>& classes() const { return classes_; }
    const PromptTemplate& prompt_template() const { return template_; }

    std::size_t size() const { return documents_.size(); }
    std::size_t num_classes() const { return classes_.size(); }

    const Document* find(const DocId& id) const;
    const ClassSpec* find_class(const ClassId& id) const;
    bool has_class(const ClassId& id) const { return find_class(id) != nullptr; }

private:
    std::vector<Document> documents_;
    std::vector<ClassSpec> classes_;
    PromptTemplate template_;
    std::map<DocId, std::size_t, DocIdLess> index_;
    std::map<ClassId, std::size_t> class_index_;
};

// Loader output; `gold` may be empty and is only ever wired into evaluation
// (and into simulation truth for the synthetic backend).
struct Dataset {
    Corpus corpus;
    GoldLabels gold;
};

struct ClassDeclaration {
    ClassId id;
    std::string label_name;
};

struct FormatSpec {
    std::string kind = "jsonl";  // one object per line: "text", optional "id", "label"
};

// Reads the collection at `path`, normalizes whitespace, assigns missing ids
// as 0-based ingestion indices and checks every corpus invariant. Malformed
// records fail with their line number.
Dataset load_corpus(const std::string& path, const FormatSpec& format,
                    const std::vector<ClassDeclaration>& classes, const PromptTemplate& tmpl,
                    const Tokenizer& tokenizer);

// Collapse interior whitespace runs and trim; returns the normalized text.
std::string normalize_whitespace(const std::string& text);

enum class LabelNameSupport {
    SinglePiece,            // works under both template kinds
    SupportedViaAveraging,  // multi-piece, label-slot template: mean of per-piece scores
    UnsupportedMask,        // multi-piece, mask-slot template: no multi-token decoding
};

struct LabelNameEntry {
    ClassId class_id;
    std::string label_name;
    std::vector<std::string> pieces;
    LabelNameSupport support;
};

struct LabelNameReport {
    std::vector<LabelNameEntry> entries;
    bool any_unsupported() const;
    std::string to_text() const;
};

// Pure report on how each label name tokenizes under the backend tokenizer
// and whether the template kind can score it.
LabelNameReport validate_label_names(const Corpus& corpus, const Tokenizer& tokenizer);

}  // namespace wsclass
