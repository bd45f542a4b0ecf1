#include "wsclass/prompting.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "wsclass/error.hpp"
#include "wsclass/losses.hpp"

namespace wsclass {

double score_label_original(const DiscriminativeEncoder& encoder, const TokenSequence& rendered) {
    const auto logits = encoder.originality_logits(rendered);
    if (rendered.slot.end > logits.size() || rendered.slot.size() == 0)
        throw_stage("score_label_original: slot span out of range for doc '" + rendered.doc_id +
                    "'");
    double sum = 0.0;
    for (std::size_t i = rendered.slot.begin; i < rendered.slot.end; ++i)
        sum += sigmoid(logits[i]);
    return sum / static_cast<double>(rendered.slot.size());
}

double score_mask_verbalizer(const GenerativeEncoder& encoder, const TokenSequence& rendered,
                             const ClassSpec& cls) {
    if (cls.pieces.size() != 1)
        throw_data("verbalizer '" + cls.label_name + "' splits into " +
                   std::to_string(cls.pieces.size()) +
                   " pieces; mask-slot scoring needs a single piece - use a label-slot "
                   "(discriminative) backend for this class set");
    const auto piece_index = encoder.vocabulary_index(cls.pieces.front());
    if (!piece_index)
        throw_data("verbalizer piece '" + cls.pieces.front() + "' is not in the encoder vocabulary");
    const auto logits = encoder.vocabulary_logits(rendered, rendered.slot.begin);
    if (*piece_index >= logits.size())
        throw_stage("score_mask_verbalizer: vocabulary index out of range");
    return softmax(logits)[*piece_index];
}

ClassPosterior class_posterior(const std::vector<LabelScore>& scores, const Corpus& corpus) {
    if (scores.empty()) throw_stage("class_posterior: no scores");
    const DocId& doc = scores.front().doc_id;
    std::map<ClassId, double> raw;
    for (const auto& s : scores) {
        if (s.doc_id != doc) throw_stage("class_posterior: scores span several documents");
        if (!corpus.has_class(s.class_id))
            throw_stage("class_posterior: unknown class '" + s.class_id + "'");
        if (!raw.emplace(s.class_id, s.raw_score).second)
            throw_stage("class_posterior: duplicate score for class '" + s.class_id + "'");
    }
    if (raw.size() != corpus.num_classes())
        throw_stage("class_posterior: expected one score per class for doc '" + doc + "'");

    double sum = 0.0;
    for (const auto& [cls, score] : raw) sum += score;
    if (sum <= 0.0)
        throw Error(ErrorKind::Stage, "degenerate document '" + doc + "': all raw scores are zero");

    ClassPosterior posterior;
    posterior.doc_id = doc;
    for (const auto& [cls, score] : raw) posterior.distribution[cls] = score / sum;
    return posterior;
}

namespace {

// Argmax in declared class order; the first declared class wins posterior ties.
DocumentScore decide(const Corpus& corpus, const DocId& doc, std::map<ClassId, double> posterior) {
    DocumentScore out;
    out.doc_id = doc;
    out.posterior = std::move(posterior);
    out.confidence = -1.0;
    for (const auto& spec : corpus.classes()) {
        const double p = out.posterior.at(spec.id);
        if (p > out.confidence) {
            out.confidence = p;
            out.predicted = spec.id;
        }
    }
    return out;
}

std::optional<DocumentScore> posterior_or_degenerate(const Corpus& corpus,
                                                     const std::vector<LabelScore>& scores) {
    double sum = 0.0;
    for (const auto& s : scores) sum += s.raw_score;
    if (sum <= 0.0) return std::nullopt;
    auto posterior = class_posterior(scores, corpus);
    return decide(corpus, posterior.doc_id, std::move(posterior.distribution));
}

}  // namespace

DiscriminativeZeroShot::DiscriminativeZeroShot(const Corpus& corpus,
                                               const DiscriminativeEncoder& encoder,
                                               const Tokenizer& tokenizer)
    : corpus_(corpus), encoder_(encoder), tokenizer_(tokenizer) {
    if (corpus.prompt_template().slot_kind() != SlotKind::Label)
        throw_config("discriminative zero-shot scoring needs a label-slot template");
}

std::optional<DocumentScore> DiscriminativeZeroShot::score(const Document& doc) const {
    std::vector<LabelScore> scores;
    scores.reserve(corpus_.num_classes());
    for (const auto& cls : corpus_.classes()) {
        const auto rendered = render(corpus_.prompt_template(), doc, cls.label_name, tokenizer_);
        scores.push_back(LabelScore{doc.id, cls.id, score_label_original(encoder_, rendered)});
    }
    return posterior_or_degenerate(corpus_, scores);
}

GenerativeZeroShot::GenerativeZeroShot(const Corpus& corpus, const GenerativeEncoder& encoder,
                                       const Tokenizer& tokenizer)
    : corpus_(corpus), encoder_(encoder), tokenizer_(tokenizer) {
    if (corpus.prompt_template().slot_kind() != SlotKind::Mask)
        throw_config("generative zero-shot scoring needs a mask-slot template");
    for (const auto& cls : corpus.classes())
        if (cls.pieces.size() != 1)
            throw_data("verbalizer '" + cls.label_name +
                       "' is multi-piece; unsupported with a mask-slot template (see "
                       "validate_label_names)");
}

std::optional<DocumentScore> GenerativeZeroShot::score(const Document& doc) const {
    const auto rendered =
        render(corpus_.prompt_template(), doc, tokenizer_.mask_token(), tokenizer_);
    std::vector<LabelScore> scores;
    scores.reserve(corpus_.num_classes());
    for (const auto& cls : corpus_.classes())
        scores.push_back(LabelScore{doc.id, cls.id, score_mask_verbalizer(encoder_, rendered, cls)});
    return posterior_or_degenerate(corpus_, scores);
}

PseudoLabelPool acquire_initial_pool(const Corpus& corpus, const ZeroShotScorer& scorer, double t0,
                                     ZeroShotScores* audit) {
    if (!(t0 > 0.0 && t0 <= 1.0)) throw_config("t0 must be in (0, 1]");

    ZeroShotScores scores;
    for (const auto& doc : corpus.documents()) {
        auto scored = scorer.score(doc);
        if (scored)
            scores.scored.push_back(std::move(*scored));
        else
            scores.degenerate.push_back(doc.id);
    }

    const std::size_t n_valid = scores.scored.size();
    const std::size_t budget =
        static_cast<std::size_t>(std::floor(t0 * static_cast<double>(n_valid)));
    if (budget == 0)
        throw_stage("initial pool would be empty (t0 = " + std::to_string(t0) + ", " +
                    std::to_string(n_valid) + " scorable documents)");

    std::vector<const DocumentScore*> order;
    order.reserve(n_valid);
    for (const auto& s : scores.scored) order.push_back(&s);
    std::sort(order.begin(), order.end(), [](const DocumentScore* a, const DocumentScore* b) {
        if (a->confidence != b->confidence) return a->confidence > b->confidence;
        return doc_id_less(a->doc_id, b->doc_id);
    });

    PseudoLabelPool pool;
    pool.iteration = 0;
    pool.confidence_floor = 0.0;
    for (std::size_t i = 0; i < budget; ++i)
        pool.entries[order[i]->doc_id] =
            PoolEntry{order[i]->predicted, order[i]->confidence, "zero_shot"};

    if (audit != nullptr) *audit = std::move(scores);
    return pool;
}

void write_scores_file(const ZeroShotScores& scores, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw_stage("cannot write scores file: " + path);
    for (const auto& s : scores.scored) {
        nlohmann::ordered_json line;
        line["doc_id"] = s.doc_id;
        nlohmann::ordered_json posterior;
        for (const auto& [cls, p] : s.posterior) posterior[cls] = p;
        line["posterior"] = posterior;
        line["predicted"] = s.predicted;
        line["confidence"] = s.confidence;
        out << line.dump() << "\n";
    }
    for (const auto& id : scores.degenerate) {
        nlohmann::ordered_json line;
        line["doc_id"] = id;
        line["degenerate"] = true;
        out << line.dump() << "\n";
    }
}

}  // namespace wsclass
