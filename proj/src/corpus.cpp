#include "wsclass/corpus.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wsclass/error.hpp"

namespace wsclass {

std::string normalize_whitespace(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool in_space = true;  // leading whitespace is dropped
    for (unsigned char c : text) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
            if (!in_space) out.push_back(' ');
            in_space = true;
        } else {
            out.push_back(static_cast<char>(c));
            in_space = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

Corpus::Corpus(std::vector<Document> documents, std::vector<ClassSpec> classes, PromptTemplate tmpl)
    : documents_(std::move(documents)), classes_(std::move(classes)), template_(std::move(tmpl)) {
    if (classes_.size() < 2)
        throw_data("a corpus needs at least 2 classes, got " + std::to_string(classes_.size()));
    for (std::size_t i = 0; i < classes_.size(); ++i) {
        const auto& c = classes_[i];
        if (c.label_name.empty()) throw_data("class '" + c.id + "' has an empty label name");
        if (c.pieces.empty()) throw_data("class '" + c.id + "' has no tokenizer pieces");
        if (!class_index_.emplace(c.id, i).second) throw_data("duplicate class id '" + c.id + "'");
    }
    for (std::size_t i = 0; i < documents_.size(); ++i) {
        const auto& d = documents_[i];
        if (d.text.empty()) throw_data("document '" + d.id + "' has empty text");
        if (!index_.emplace(d.id, i).second) throw_data("duplicate doc_id '" + d.id + "'");
    }
}

const Document* Corpus::find(const DocId& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &documents_[it->second];
}

const ClassSpec* Corpus::find_class(const ClassId& id) const {
    auto it = class_index_.find(id);
    return it == class_index_.end() ? nullptr : &classes_[it->second];
}

Dataset load_corpus(const std::string& path, const FormatSpec& format,
                    const std::vector<ClassDeclaration>& classes, const PromptTemplate& tmpl,
                    const Tokenizer& tokenizer) {
    if (format.kind != "jsonl")
        throw_config("unsupported corpus format '" + format.kind + "' (supported: jsonl)");

    std::vector<ClassSpec> specs;
    specs.reserve(classes.size());
    for (const auto& decl : classes) {
        ClassSpec spec;
        spec.id = decl.id;
        spec.label_name = decl.label_name;
        spec.pieces = tokenizer.tokenize(decl.label_name);
        if (spec.pieces.empty())
            throw_data("label name '" + decl.label_name + "' tokenizes to nothing");
        specs.push_back(std::move(spec));
    }
    std::set<ClassId> declared;
    for (const auto& s : specs) declared.insert(s.id);

    std::ifstream in(path);
    if (!in) throw_data("cannot open corpus file: " + path);

    std::vector<Document> documents;
    GoldLabels gold;
    std::set<DocId> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    std::size_t auto_id = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw_data(path + ":" + std::to_string(line_no) + ": malformed JSON record: " +
                       e.what());
        }
        if (!record.is_object() || !record.contains("text") || !record["text"].is_string())
            throw_data(path + ":" + std::to_string(line_no) +
                       ": record must be an object with a string 'text' field");

        Document doc;
        doc.text = normalize_whitespace(record["text"].get<std::string>());
        if (doc.text.empty())
            throw_data(path + ":" + std::to_string(line_no) + ": empty text field");

        if (record.contains("id")) {
            const auto& id = record["id"];
            if (id.is_string())
                doc.id = id.get<std::string>();
            else if (id.is_number_integer())
                doc.id = std::to_string(id.get<long long>());
            else
                throw_data(path + ":" + std::to_string(line_no) + ": 'id' must be string or int");
        } else {
            doc.id = std::to_string(auto_id);
        }
        ++auto_id;
        if (!seen_ids.insert(doc.id).second)
            throw_data(path + ":" + std::to_string(line_no) + ": duplicate doc_id '" + doc.id +
                       "'");

        if (record.contains("label") && !record["label"].is_null()) {
            if (!record["label"].is_string())
                throw_data(path + ":" + std::to_string(line_no) + ": 'label' must be a string");
            const auto label = record["label"].get<std::string>();
            if (declared.find(label) == declared.end())
                throw_data(path + ":" + std::to_string(line_no) + ": unknown gold label '" +
                           label + "'");
            gold[doc.id] = label;
        }

        for (const auto& [key, value] : record.items()) {
            (void)value;
            if (key != "text" && key != "id" && key != "label")
                throw_data(path + ":" + std::to_string(line_no) + ": unknown field '" + key + "'");
        }
        documents.push_back(std::move(doc));
    }

    return Dataset{Corpus(std::move(documents), std::move(specs), tmpl), std::move(gold)};
}

bool LabelNameReport::any_unsupported() const {
    for (const auto& e : entries)
        if (e.support == LabelNameSupport::UnsupportedMask) return true;
    return false;
}

std::string LabelNameReport::to_text() const {
    std::ostringstream os;
    for (const auto& e : entries) {
        os << e.class_id << ": '" << e.label_name << "' -> [";
        for (std::size_t i = 0; i < e.pieces.size(); ++i) {
            if (i) os << ", ";
            os << e.pieces[i];
        }
        os << "] ";
        switch (e.support) {
            case LabelNameSupport::SinglePiece: os << "single piece"; break;
            case LabelNameSupport::SupportedViaAveraging: os << "multi piece, scored by averaging"; break;
            case LabelNameSupport::UnsupportedMask:
                os << "multi piece, UNSUPPORTED with a mask-slot template";
                break;
        }
        os << "\n";
    }
    return os.str();
}

LabelNameReport validate_label_names(const Corpus& corpus, const Tokenizer& tokenizer) {
    LabelNameReport report;
    const bool mask_slot = corpus.prompt_template().slot_kind() == SlotKind::Mask;
    for (const auto& spec : corpus.classes()) {
        LabelNameEntry entry;
        entry.class_id = spec.id;
        entry.label_name = spec.label_name;
        entry.pieces = tokenizer.tokenize(spec.label_name);
        if (entry.pieces.size() <= 1)
            entry.support = LabelNameSupport::SinglePiece;
        else
            entry.support = mask_slot ? LabelNameSupport::UnsupportedMask
                                      : LabelNameSupport::SupportedViaAveraging;
        report.entries.push_back(std::move(entry));
    }
    return report;
}

}  // namespace wsclass
