#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wsclass {

using DocId = std::string;
using ClassId = std::string;

// Numeric-aware ordering: ids that are pure digit strings compare as numbers
// (by length, then bytes), everything else byte-lexicographically. Assigned
// ids "0".."12" therefore sort in ingestion order. This is the single
// tie-breaking order used across selection, pools and serialization.
struct DocIdLess {
    static bool all_digits(const std::string& s) {
        if (s.empty()) return false;
        for (char c : s)
            if (c < '0' || c > '9') return false;
        return true;
    }
    bool operator()(const std::string& a, const std::string& b) const {
        const bool da = all_digits(a), db = all_digits(b);
        if (da && db) {
            if (a.size() != b.size()) return a.size() < b.size();
            return a < b;
        }
        if (da != db) return da;  // numeric ids sort before alphanumeric ones
        return a < b;
    }
};

inline bool doc_id_less(const DocId& a, const DocId& b) { return DocIdLess{}(a, b); }

// One unlabeled text unit. Gold labels are deliberately not part of this
// type; they live in a GoldLabels side table that only evaluation-facing
// code receives.
struct Document {
    DocId id;
    std::string text;
};

// A target class with its verbalizer and the tokenizer pieces of that
// verbalizer under the active backend tokenizer.
struct ClassSpec {
    ClassId id;
    std::string label_name;
    std::vector<std::string> pieces;

    bool multi_piece() const { return pieces.size() > 1; }
};

using GoldLabels = std::map<DocId, ClassId, DocIdLess>;

struct Prediction {
    DocId doc_id;
    ClassId class_id;
    double confidence = 0.0;  // normalized probability of the predicted class
};

// (document, class) pair as consumed by fine-tuning.
struct LabeledDoc {
    DocId doc_id;
    std::string text;
    ClassId label;
};

}  // namespace wsclass
