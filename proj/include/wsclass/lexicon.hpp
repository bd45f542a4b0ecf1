#pragma once

#include <map>
#include <set>
#include <string>

#include "wsclass/prompting.hpp"

namespace wsclass {

// Cue words per label name, e.g. {"good": ["great", "delicious", ...]}.
struct Lexicon {
    std::map<std::string, std::set<std::string>> cues;

    bool has_label(const std::string& label_name) const { return cues.count(label_name) != 0; }
};

// JSON object file: label name -> array of cue words. Words are lowercased.
Lexicon load_lexicon(const std::string& path);

// Deterministic replaced-token-detection stand-in for real text: the slot
// filler looks "original" in proportion to how many of its cue words occur in
// the document, saturating after a few hits.
class LexiconEncoder : public DiscriminativeEncoder {
public:
    explicit LexiconEncoder(Lexicon lexicon, double low_logit = -2.2, double high_logit = 2.2,
                            double saturation_hits = 3.0);

    std::vector<double> originality_logits(const TokenSequence& rendered) const override;

private:
    Lexicon lexicon_;
    double low_logit_;
    double high_logit_;
    double saturation_hits_;
};

}  // namespace wsclass
