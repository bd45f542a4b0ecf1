#pragma once

#include <memory>
#include <vector>

#include "wsclass/backend.hpp"
#include "wsclass/corpus.hpp"
#include "wsclass/selection.hpp"

namespace wsclass {

// Materializes pool entries into labeled training pairs (texts resolved
// through the corpus, gold labels never involved).
std::vector<LabeledDoc> pool_to_examples(const PseudoLabelPool& pool, const Corpus& corpus);

// Sequence-level view: fresh head-token model fit on the pool with
// cross-entropy. Rejects empty pools and labels outside the class set.
std::unique_ptr<Classifier> head_token_finetune(const ClassifierBackend& backend,
                                                const PseudoLabelPool& pool, const Corpus& corpus,
                                                const TrainSpec& spec, std::uint64_t seed);

// Token-level view: fresh prompt model fit on a labeled subset with the
// per-class binary objective.
std::unique_ptr<Classifier> prompt_finetune(const ClassifierBackend& backend,
                                            const std::vector<LabeledDoc>& subset,
                                            const Corpus& corpus, const TrainSpec& spec,
                                            std::uint64_t seed);

// One prediction per corpus document, confidence already normalized.
std::vector<Prediction> predict_with_confidence(const Classifier& classifier,
                                                const Corpus& corpus);

}  // namespace wsclass
