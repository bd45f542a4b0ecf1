#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "wsclass/backend.hpp"
#include "wsclass/prompting.hpp"
#include "wsclass/types.hpp"

namespace wsclass {

// Shared per-document difficulty in [0,1). Every simulated component keyed on
// the same world seed agrees on which documents are hard, which is what makes
// confidence rankings correlate across views the way they do for real
// encoders sharing one corpus.
double document_difficulty(std::uint64_t world_seed, const DocId& id);

// Calibration of a simulated classifier view: how accuracy responds to
// training and how confidence relates to correctness.
struct OracleCalibration {
    // Per-document accuracy swing: easy documents gain up to tilt/2, hard
    // ones lose as much.
    double difficulty_tilt = 0.0;

    // fit() lifts accuracy by max_gain * n / (n + half_size) and subtracts
    // noise_sensitivity * (1 - clean_fraction); an unfit model sits at the
    // configured base accuracies.
    double sharpen_max_gain = 0.0;
    double sharpen_half_size = 150.0;
    double noise_sensitivity = 0.0;

    // A trained document's label is replayed verbatim with this probability,
    // the memorization channel that lets pool errors persist.
    double memorize_rate = 0.0;
    double replay_confidence = 0.90;

    // Confidence scale on wrong predictions ramps from floor (unfit) toward
    // ceiling as the training set grows past maturity_half_size; mature
    // models are the overconfident ones.
    double overconfidence_floor = 0.75;
    double overconfidence_ceiling = 0.97;
    double maturity_half_size = 400.0;

    // Beyond the difficulty-driven error front, a model trained on noisy
    // labels is confidently wrong on a static per-view document set: noise it
    // memorized generalizes wrongly. The set grows toward blunder_rate with
    // the maturity ramp, scaled by min(1, amplification * (1 - clean
    // fraction)), so a model trained on clean pools never blunders. Blunders
    // ignore difficulty and therefore carry high confidence.
    double blunder_rate = 0.0;
    double blunder_noise_amplification = 1.0;

    double confidence_jitter = 0.01;  // per-fit rank jitter, uniform +-

    void validate() const;
};

// Test-double backend: predict emits each document's hidden true class with a
// configured per-class probability, confidences drawn from the calibration
// model. All draws are keyed on (world seed, view, doc_id), so streams are
// reproducible, order-independent and distinct between the two views.
class SyntheticOracleBackend : public ClassifierBackend {
public:
    SyntheticOracleBackend(ViewKind view, std::vector<ClassSpec> classes, GoldLabels truth,
                           std::map<ClassId, double> accuracy_per_class,
                           OracleCalibration calibration, std::uint64_t world_seed);

    static std::map<ClassId, double> uniform_accuracy(const std::vector<ClassSpec>& classes,
                                                      double accuracy);

    ViewKind view() const override { return view_; }
    std::string name() const override;
    int encoder_depth() const override { return 12; }

    std::unique_ptr<Classifier> fresh_init(std::uint64_t seed) const override;
    std::unique_ptr<Classifier> load(const std::string& artifact_path) const override;

private:
    ViewKind view_;
    std::vector<ClassSpec> classes_;
    GoldLabels truth_;
    std::map<ClassId, double> accuracy_;
    OracleCalibration calibration_;
    std::uint64_t world_seed_;
};

// Zero-shot side of the same world: a fixed (unfit) encoder whose slot
// scores favor the hidden true class on easy documents and go astray at the
// configured rate on hard ones.
struct SyntheticEncoderParams {
    double noise_rate = 0.30;     // mean share of documents scored for a wrong class
    double difficulty_tilt = 0.50;
    double score_jitter = 0.05;

    void validate() const;
};

class SyntheticEncoder : public DiscriminativeEncoder, public GenerativeEncoder {
public:
    SyntheticEncoder(std::vector<ClassSpec> classes, GoldLabels truth,
                     SyntheticEncoderParams params, std::uint64_t world_seed);

    std::vector<double> originality_logits(const TokenSequence& rendered) const override;
    std::vector<double> vocabulary_logits(const TokenSequence& rendered,
                                          std::size_t mask_index) const override;
    std::optional<std::size_t> vocabulary_index(const std::string& piece) const override;

    // The class this encoder would argmax for the document; exposed for tests.
    ClassId slot_decision(const DocId& id) const;

private:
    double raw_score(const DocId& id, const ClassId& cls) const;

    std::vector<ClassSpec> classes_;
    GoldLabels truth_;
    SyntheticEncoderParams params_;
    std::uint64_t world_seed_;
    std::map<std::string, ClassId> label_to_class_;
    std::vector<std::string> vocabulary_;  // class pieces plus one filler token
    std::map<std::string, std::size_t> vocab_index_;
};

}  // namespace wsclass
