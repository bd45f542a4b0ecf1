#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wsclass/corpus.hpp"
#include "wsclass/prompt_template.hpp"
#include "wsclass/selection.hpp"
#include "wsclass/types.hpp"

namespace wsclass {

// A pre-trained encoder with a per-token binary head: for each token of the
// rendered sequence, the logit that the token is "original" rather than
// replaced.
class DiscriminativeEncoder {
public:
    virtual ~DiscriminativeEncoder() = default;
    virtual std::vector<double> originality_logits(const TokenSequence& rendered) const = 0;
};

// A pre-trained masked-token encoder: full-vocabulary logits at one masked
// position, plus the vocabulary lookup for verbalizer pieces.
class GenerativeEncoder {
public:
    virtual ~GenerativeEncoder() = default;
    virtual std::vector<double> vocabulary_logits(const TokenSequence& rendered,
                                                  std::size_t mask_index) const = 0;
    virtual std::optional<std::size_t> vocabulary_index(const std::string& piece) const = 0;
};

// Probability in [0,1] that the slot content is judged original (label slot)
// or the verbalizer probability at the masked position (mask slot).
struct LabelScore {
    DocId doc_id;
    ClassId class_id;
    double raw_score = 0.0;
};

struct ClassPosterior {
    DocId doc_id;
    std::map<ClassId, double> distribution;
};

// Sigmoid of the slot token's head logit; label names spanning several
// pieces are scored by the arithmetic mean of per-piece probabilities.
double score_label_original(const DiscriminativeEncoder& encoder, const TokenSequence& rendered);

// Softmax probability of the (single-piece) verbalizer at the masked position.
double score_mask_verbalizer(const GenerativeEncoder& encoder, const TokenSequence& rendered,
                             const ClassSpec& cls);

// Normalizes one document's raw label scores into a class posterior:
// p(c|d) = p(l(c)|d) / sum_c' p(l(c')|d). Requires exactly one score per
// class; throws a degenerate-document error when every raw score is zero.
ClassPosterior class_posterior(const std::vector<LabelScore>& scores, const Corpus& corpus);

// Everything scored for one document: posterior plus the argmax decision.
struct DocumentScore {
    DocId doc_id;
    std::map<ClassId, double> posterior;
    ClassId predicted;
    double confidence = 0.0;
};

struct ZeroShotScores {
    std::vector<DocumentScore> scored;   // ingestion order, degenerate docs excluded
    std::vector<DocId> degenerate;       // all raw scores were zero
};

class ZeroShotScorer {
public:
    virtual ~ZeroShotScorer() = default;
    // Posterior for one document, or nullopt when the document is degenerate.
    virtual std::optional<DocumentScore> score(const Document& doc) const = 0;
};

// Scores label-slot templates through a discriminative encoder: one rendered
// sequence per class, each scored for slot originality.
class DiscriminativeZeroShot : public ZeroShotScorer {
public:
    DiscriminativeZeroShot(const Corpus& corpus, const DiscriminativeEncoder& encoder,
                           const Tokenizer& tokenizer);
    std::optional<DocumentScore> score(const Document& doc) const override;

private:
    const Corpus& corpus_;
    const DiscriminativeEncoder& encoder_;
    const Tokenizer& tokenizer_;
};

// Scores mask-slot templates through a generative encoder: one rendered
// sequence per document, verbalizer probabilities read at the mask. Rejects
// multi-piece verbalizers at construction.
class GenerativeZeroShot : public ZeroShotScorer {
public:
    GenerativeZeroShot(const Corpus& corpus, const GenerativeEncoder& encoder,
                       const Tokenizer& tokenizer);
    std::optional<DocumentScore> score(const Document& doc) const override;

private:
    const Corpus& corpus_;
    const GenerativeEncoder& encoder_;
    const Tokenizer& tokenizer_;
};

// Scores the whole corpus and keeps the floor(t0 * n_valid) most confident
// assignments, ties broken by ascending doc_id; the returned pool is tagged
// iteration 0. n_valid counts non-degenerate documents only.
PseudoLabelPool acquire_initial_pool(const Corpus& corpus, const ZeroShotScorer& scorer, double t0,
                                     ZeroShotScores* audit = nullptr);

// Audit file: one JSONL record per scored document with the full posterior.
void write_scores_file(const ZeroShotScores& scores, const std::string& path);

}  // namespace wsclass
