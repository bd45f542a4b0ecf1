#include "wsclass/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <nlohmann/json.hpp>

#include "wsclass/error.hpp"

namespace wsclass {

namespace {

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

Lexicon load_lexicon(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_data("cannot read lexicon file '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw_data("lexicon file '" + path + "': " + e.what());
    }
    if (!j.is_object()) throw_data("lexicon file '" + path + "' must hold a JSON object");
    Lexicon lexicon;
    for (const auto& [label, words] : j.items()) {
        if (!words.is_array())
            throw_data("lexicon entry '" + label + "' in '" + path + "' must be an array");
        auto& set = lexicon.cues[lowercase(label)];
        for (const auto& w : words) {
            if (!w.is_string())
                throw_data("lexicon entry '" + label + "' in '" + path +
                           "' contains a non-string word");
            set.insert(lowercase(w.get<std::string>()));
        }
        if (set.empty())
            throw_data("lexicon entry '" + label + "' in '" + path + "' has no words");
    }
    if (lexicon.cues.empty()) throw_data("lexicon file '" + path + "' is empty");
    return lexicon;
}

LexiconEncoder::LexiconEncoder(Lexicon lexicon, double low_logit, double high_logit,
                               double saturation_hits)
    : lexicon_(std::move(lexicon)),
      low_logit_(low_logit),
      high_logit_(high_logit),
      saturation_hits_(saturation_hits) {
    if (!(saturation_hits_ > 0.0)) throw_config("lexicon encoder: saturation_hits must be > 0");
    if (!(high_logit_ > low_logit_))
        throw_config("lexicon encoder: high_logit must exceed low_logit");
}

std::vector<double> LexiconEncoder::originality_logits(const TokenSequence& rendered) const {
    const auto cue_it = lexicon_.cues.find(rendered.slot_text);
    if (cue_it == lexicon_.cues.end())
        throw_data("lexicon has no entry for label '" + rendered.slot_text + "'");
    const auto& cues = cue_it->second;

    double hits = 0.0;
    for (std::size_t i = 0; i < rendered.tokens.size(); ++i) {
        if (i >= rendered.slot.begin && i < rendered.slot.end) continue;
        if (cues.count(rendered.tokens[i])) hits += 1.0;
    }
    const double strength = std::min(1.0, hits / saturation_hits_);
    const double slot_logit = low_logit_ + (high_logit_ - low_logit_) * strength;

    std::vector<double> logits(rendered.tokens.size(), 2.0);
    for (std::size_t i = rendered.slot.begin; i < rendered.slot.end && i < logits.size(); ++i)
        logits[i] = slot_logit;
    return logits;
}

}  // namespace wsclass
