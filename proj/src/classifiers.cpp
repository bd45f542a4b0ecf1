#include "wsclass/classifiers.hpp"

#include <atomic>

#include "wsclass/error.hpp"

namespace wsclass {

std::string to_string(ViewKind view) { return view == ViewKind::Head ? "head" : "prompt"; }

void TrainSpec::validate(int encoder_depth) const {
    if (epochs < 1) throw_config("train spec: epochs must be >= 1");
    if (batch_size < 1) throw_config("train spec: batch_size must be >= 1");
    if (!(peak_learning_rate > 0.0)) throw_config("train spec: peak_learning_rate must be > 0");
    if (frozen_layers < 0 || frozen_layers >= encoder_depth)
        throw_config("train spec: frozen_layers must be in [0, encoder depth " +
                     std::to_string(encoder_depth) + ")");
}

namespace {
std::atomic<std::uint64_t> g_next_instance_id{1};
}

Classifier::Classifier() : instance_id_(g_next_instance_id.fetch_add(1)) {}

std::vector<LabeledDoc> pool_to_examples(const PseudoLabelPool& pool, const Corpus& corpus) {
    std::vector<LabeledDoc> examples;
    examples.reserve(pool.size());
    for (const auto& [id, entry] : pool.entries) {
        if (!corpus.has_class(entry.class_id))
            throw_stage("pool entry '" + id + "' labeled with unknown class '" + entry.class_id +
                        "'");
        const Document* doc = corpus.find(id);
        if (doc == nullptr) throw_stage("pool entry '" + id + "' is not in the corpus");
        examples.push_back(LabeledDoc{id, doc->text, entry.class_id});
    }
    return examples;
}

std::unique_ptr<Classifier> head_token_finetune(const ClassifierBackend& backend,
                                                const PseudoLabelPool& pool, const Corpus& corpus,
                                                const TrainSpec& spec, std::uint64_t seed) {
    if (backend.view() != ViewKind::Head)
        throw_stage("head_token_finetune needs a head-view backend, got " +
                    to_string(backend.view()));
    if (pool.empty()) throw_stage("head_token_finetune: empty pseudo-label pool");
    spec.validate(backend.encoder_depth());
    const auto examples = pool_to_examples(pool, corpus);
    auto classifier = backend.fresh_init(seed);
    classifier->fit(examples, spec);
    return classifier;
}

std::unique_ptr<Classifier> prompt_finetune(const ClassifierBackend& backend,
                                            const std::vector<LabeledDoc>& subset,
                                            const Corpus& corpus, const TrainSpec& spec,
                                            std::uint64_t seed) {
    if (backend.view() != ViewKind::Prompt)
        throw_stage("prompt_finetune needs a prompt-view backend, got " +
                    to_string(backend.view()));
    if (subset.empty()) throw_stage("prompt_finetune: empty training subset");
    spec.validate(backend.encoder_depth());
    for (const auto& ex : subset)
        if (!corpus.has_class(ex.label))
            throw_stage("subset example '" + ex.doc_id + "' labeled with unknown class '" +
                        ex.label + "'");
    auto classifier = backend.fresh_init(seed);
    classifier->fit(subset, spec);
    return classifier;
}

std::vector<Prediction> predict_with_confidence(const Classifier& classifier,
                                                const Corpus& corpus) {
    auto predictions = classifier.predict(corpus);
    if (predictions.size() != corpus.size())
        throw_stage("backend returned " + std::to_string(predictions.size()) +
                    " predictions for " + std::to_string(corpus.size()) + " documents");
    for (const auto& p : predictions) {
        if (!corpus.has_class(p.class_id))
            throw_stage("backend predicted unknown class '" + p.class_id + "'");
        if (!(p.confidence >= 0.0 && p.confidence <= 1.0))
            throw_stage("backend confidence out of [0,1] for doc '" + p.doc_id + "'");
    }
    return predictions;
}

}  // namespace wsclass
