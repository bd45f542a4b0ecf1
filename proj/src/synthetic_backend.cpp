#include "wsclass/synthetic_backend.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "wsclass/error.hpp"
#include "wsclass/util/rng.hpp"

namespace wsclass {

namespace {

using ordered_json = nlohmann::ordered_json;

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

void check_probability(double p, const std::string& what) {
    if (!(p >= 0.0 && p <= 1.0)) throw_config(what + " must be a probability in [0,1]");
}

}  // namespace

double document_difficulty(std::uint64_t world_seed, const DocId& id) {
    return rng::keyed_unit(world_seed, "difficulty", rng::fnv1a(id));
}

void OracleCalibration::validate() const {
    check_probability(memorize_rate, "memorize_rate");
    check_probability(replay_confidence, "replay_confidence");
    check_probability(overconfidence_floor, "overconfidence_floor");
    check_probability(overconfidence_ceiling, "overconfidence_ceiling");
    if (difficulty_tilt < 0.0) throw_config("difficulty_tilt must be >= 0");
    if (sharpen_max_gain < 0.0) throw_config("sharpen_max_gain must be >= 0");
    if (!(sharpen_half_size > 0.0)) throw_config("sharpen_half_size must be > 0");
    if (noise_sensitivity < 0.0) throw_config("noise_sensitivity must be >= 0");
    if (!(maturity_half_size > 0.0)) throw_config("maturity_half_size must be > 0");
    check_probability(blunder_rate, "blunder_rate");
    if (blunder_noise_amplification < 0.0)
        throw_config("blunder_noise_amplification must be >= 0");
    if (confidence_jitter < 0.0) throw_config("confidence_jitter must be >= 0");
}

void SyntheticEncoderParams::validate() const {
    check_probability(noise_rate, "noise_rate");
    if (difficulty_tilt < 0.0) throw_config("difficulty_tilt must be >= 0");
    if (score_jitter < 0.0) throw_config("score_jitter must be >= 0");
}

namespace {

// One simulated view instance. Nothing here depends on the process-unique
// instance id; every draw is keyed on (world seed, view tag, doc_id) plus the
// fit seed, so identical runs replay identical streams.
class SyntheticModel : public Classifier {
public:
    SyntheticModel(ViewKind view, const std::vector<ClassSpec>& classes, const GoldLabels& truth,
                   const std::map<ClassId, double>& accuracy, const OracleCalibration& cal,
                   std::uint64_t world_seed, std::uint64_t fit_seed)
        : view_(view),
          classes_(classes),
          truth_(truth),
          accuracy_(accuracy),
          cal_(cal),
          stream_(rng::mix(world_seed, rng::fnv1a(to_string(view)))),
          world_seed_(world_seed),
          fit_seed_(fit_seed) {}

    void fit(std::span<const LabeledDoc> examples, const TrainSpec& spec) override {
        spec.validate(12);
        if (examples.empty()) throw_stage("synthetic oracle fit: no training examples");
        trained_.clear();
        std::size_t clean = 0;
        for (const auto& ex : examples) {
            const auto truth_it = truth_.find(ex.doc_id);
            if (truth_it == truth_.end())
                throw_stage("synthetic oracle: no hidden truth for doc '" + ex.doc_id + "'");
            if (!accuracy_.count(ex.label))
                throw_stage("synthetic oracle fit: unknown label '" + ex.label + "'");
            trained_[ex.doc_id] = ex.label;
            if (ex.label == truth_it->second) ++clean;
        }
        train_size_ = trained_.size();
        clean_fraction_ = static_cast<double>(clean) / static_cast<double>(train_size_);
    }

    std::vector<Prediction> predict(const Corpus& corpus) const override {
        std::vector<Prediction> out;
        out.reserve(corpus.size());
        for (const auto& doc : corpus.documents()) out.push_back(predict_one(doc.id));
        return out;
    }

    std::string save(const std::string& directory, const std::string& stem) const override {
        std::filesystem::create_directories(directory);
        const std::string path = (std::filesystem::path(directory) / (stem + ".json")).string();
        ordered_json j;
        j["format"] = "synthetic-oracle";
        j["view"] = to_string(view_);
        j["fit_seed"] = fit_seed_;
        j["train_size"] = train_size_;
        j["clean_fraction"] = clean_fraction_;
        j["trained"] = ordered_json::object();
        for (const auto& [id, cls] : trained_) j["trained"][id] = cls;
        std::ofstream outfile(path, std::ios::binary);
        if (!outfile) throw_stage("cannot write classifier artifact '" + path + "'");
        outfile << j.dump() << '\n';
        if (!outfile) throw_stage("short write on classifier artifact '" + path + "'");
        return path;
    }

    void restore(std::map<DocId, ClassId, DocIdLess> trained, std::size_t train_size,
                 double clean_fraction) {
        trained_ = std::move(trained);
        train_size_ = train_size;
        clean_fraction_ = clean_fraction;
    }

private:
    // Model-level accuracy for a document of true class c: configured base,
    // lifted by training volume, dragged down by training noise.
    double model_accuracy(const ClassId& truth_class) const {
        double acc = accuracy_.at(truth_class);
        if (train_size_ > 0) {
            const double n = static_cast<double>(train_size_);
            acc += cal_.sharpen_max_gain * n / (n + cal_.sharpen_half_size);
            acc -= cal_.noise_sensitivity * (1.0 - clean_fraction_);
        }
        return clamp01(acc);
    }

    double overconfidence() const {
        const double n = static_cast<double>(train_size_);
        return cal_.overconfidence_floor +
               (cal_.overconfidence_ceiling - cal_.overconfidence_floor) * n /
                   (n + cal_.maturity_half_size);
    }

    Prediction predict_one(const DocId& id) const {
        const auto truth_it = truth_.find(id);
        if (truth_it == truth_.end())
            throw_stage("synthetic oracle: no hidden truth for doc '" + id + "'");
        const ClassId& truth_class = truth_it->second;
        const double delta = document_difficulty(world_seed_, id);
        const double jitter =
            cal_.confidence_jitter *
            (2.0 * rng::keyed_unit(rng::mix(stream_, fit_seed_), "jitter", rng::fnv1a(id)) - 1.0);
        const double floor_conf = 1.0 / static_cast<double>(classes_.size());

        // Memorization channel: a trained document replays its trained label.
        const auto trained_it = trained_.find(id);
        if (trained_it != trained_.end() &&
            rng::keyed_unit(stream_, "mem", rng::fnv1a(id)) < cal_.memorize_rate) {
            double conf = cal_.replay_confidence +
                          (0.999 - cal_.replay_confidence) * (1.0 - delta) + jitter;
            return Prediction{id, trained_it->second,
                              std::clamp(conf, floor_conf, 0.999)};
        }

        const double acc_doc =
            clamp01(model_accuracy(truth_class) + cal_.difficulty_tilt * (0.5 - delta));
        const double maturity =
            static_cast<double>(train_size_) /
            (static_cast<double>(train_size_) + cal_.maturity_half_size);
        const double blunder_front =
            cal_.blunder_rate * maturity *
            std::min(1.0, cal_.blunder_noise_amplification * (1.0 - clean_fraction_));
        const bool wrong =
            rng::keyed_unit(stream_, "err", rng::fnv1a(id)) < 1.0 - acc_doc ||
            rng::keyed_unit(stream_, "blunder", rng::fnv1a(id)) < blunder_front;
        const double sharpness = 1.0 - (1.0 - acc_doc) * (0.25 + 0.75 * delta);

        if (!wrong) {
            const double conf = std::clamp(sharpness + jitter, floor_conf, 0.999);
            return Prediction{id, truth_class, conf};
        }

        // Stable wrong-class pick among the other classes.
        std::size_t pick = static_cast<std::size_t>(
            rng::keyed_unit(stream_, "pick", rng::fnv1a(id)) *
            static_cast<double>(classes_.size() - 1));
        pick = std::min(pick, classes_.size() - 2);
        std::size_t c = 0;
        for (std::size_t k = 0; k < classes_.size(); ++k) {
            if (classes_[k].id == truth_class) continue;
            if (c == pick) {
                const double conf =
                    std::clamp(overconfidence() * sharpness + jitter, floor_conf, 0.999);
                return Prediction{id, classes_[k].id, conf};
            }
            ++c;
        }
        throw_stage("synthetic oracle: class set too small to pick a wrong class");
    }

    ViewKind view_;
    std::vector<ClassSpec> classes_;
    GoldLabels truth_;
    std::map<ClassId, double> accuracy_;
    OracleCalibration cal_;
    std::uint64_t stream_;
    std::uint64_t world_seed_;
    std::uint64_t fit_seed_;

    std::map<DocId, ClassId, DocIdLess> trained_;
    std::size_t train_size_ = 0;
    double clean_fraction_ = 1.0;
};

}  // namespace

SyntheticOracleBackend::SyntheticOracleBackend(ViewKind view, std::vector<ClassSpec> classes,
                                               GoldLabels truth,
                                               std::map<ClassId, double> accuracy_per_class,
                                               OracleCalibration calibration,
                                               std::uint64_t world_seed)
    : view_(view),
      classes_(std::move(classes)),
      truth_(std::move(truth)),
      accuracy_(std::move(accuracy_per_class)),
      calibration_(calibration),
      world_seed_(world_seed) {
    if (classes_.size() < 2) throw_config("synthetic oracle: need at least two classes");
    for (const auto& cls : classes_) {
        const auto it = accuracy_.find(cls.id);
        if (it == accuracy_.end())
            throw_config("synthetic oracle: no accuracy configured for class '" + cls.id + "'");
        check_probability(it->second, "accuracy for class '" + cls.id + "'");
    }
    if (accuracy_.size() != classes_.size())
        throw_config("synthetic oracle: accuracy configured for an undeclared class");
    calibration_.validate();
}

std::map<ClassId, double> SyntheticOracleBackend::uniform_accuracy(
    const std::vector<ClassSpec>& classes, double accuracy) {
    std::map<ClassId, double> out;
    for (const auto& cls : classes) out[cls.id] = accuracy;
    return out;
}

std::string SyntheticOracleBackend::name() const {
    return view_ == ViewKind::Head ? "synthetic_head" : "synthetic_prompt";
}

std::unique_ptr<Classifier> SyntheticOracleBackend::fresh_init(std::uint64_t seed) const {
    return std::make_unique<SyntheticModel>(view_, classes_, truth_, accuracy_, calibration_,
                                            world_seed_, seed);
}

std::unique_ptr<Classifier> SyntheticOracleBackend::load(const std::string& artifact_path) const {
    std::ifstream in(artifact_path, std::ios::binary);
    if (!in) throw_data("cannot read classifier artifact '" + artifact_path + "'");
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw_data("classifier artifact '" + artifact_path + "': " + e.what());
    }
    if (j.value("format", "") != "synthetic-oracle")
        throw_data("classifier artifact '" + artifact_path + "' has the wrong format tag");
    if (j.value("view", "") != to_string(view_))
        throw_data("classifier artifact '" + artifact_path + "' was trained for view '" +
                   j.value("view", "") + "', backend is '" + to_string(view_) + "'");
    auto model = std::make_unique<SyntheticModel>(view_, classes_, truth_, accuracy_, calibration_,
                                                  world_seed_, j.value("fit_seed", 0ull));
    std::map<DocId, ClassId, DocIdLess> trained;
    if (j.contains("trained"))
        for (const auto& [id, cls] : j["trained"].items()) trained[id] = cls.get<ClassId>();
    model->restore(std::move(trained), j.value("train_size", std::size_t{0}),
                   j.value("clean_fraction", 1.0));
    return model;
}

SyntheticEncoder::SyntheticEncoder(std::vector<ClassSpec> classes, GoldLabels truth,
                                   SyntheticEncoderParams params, std::uint64_t world_seed)
    : classes_(std::move(classes)),
      truth_(std::move(truth)),
      params_(params),
      world_seed_(world_seed) {
    if (classes_.size() < 2) throw_config("synthetic encoder: need at least two classes");
    params_.validate();
    for (const auto& cls : classes_) {
        if (!label_to_class_.emplace(cls.label_name, cls.id).second)
            throw_config("synthetic encoder: duplicate label name '" + cls.label_name + "'");
        for (const auto& piece : cls.pieces)
            if (vocab_index_.emplace(piece, vocabulary_.size()).second)
                vocabulary_.push_back(piece);
    }
    static const std::string kFiller = "the";
    if (vocab_index_.emplace(kFiller, vocabulary_.size()).second) vocabulary_.push_back(kFiller);
}

ClassId SyntheticEncoder::slot_decision(const DocId& id) const {
    const auto truth_it = truth_.find(id);
    if (truth_it == truth_.end())
        throw_stage("synthetic encoder: no hidden truth for doc '" + id + "'");
    const double delta = document_difficulty(world_seed_, id);
    const double p_wrong =
        std::clamp(params_.noise_rate + params_.difficulty_tilt * (delta - 0.5), 0.0, 0.99);
    if (rng::keyed_unit(world_seed_, "zs-err", rng::fnv1a(id)) >= p_wrong)
        return truth_it->second;
    std::size_t pick = static_cast<std::size_t>(
        rng::keyed_unit(world_seed_, "zs-pick", rng::fnv1a(id)) *
        static_cast<double>(classes_.size() - 1));
    pick = std::min(pick, classes_.size() - 2);
    std::size_t c = 0;
    for (const auto& cls : classes_) {
        if (cls.id == truth_it->second) continue;
        if (c == pick) return cls.id;
        ++c;
    }
    throw_stage("synthetic encoder: class set too small to pick a wrong class");
}

double SyntheticEncoder::raw_score(const DocId& id, const ClassId& cls) const {
    const double delta = document_difficulty(world_seed_, id);
    const ClassId decided = slot_decision(id);
    double s;
    if (cls == decided) {
        const double u = rng::keyed_unit(world_seed_, "zs-hi", rng::fnv1a(id));
        s = 0.50 + 0.48 * (1.0 - delta) * (1.0 - params_.score_jitter * u);
    } else {
        const double u =
            rng::keyed_unit(world_seed_, "zs-lo", rng::mix(rng::fnv1a(id), rng::fnv1a(cls)));
        s = 0.06 + 0.22 * u + 0.10 * delta;
    }
    return std::clamp(s, 0.02, 0.98);
}

std::vector<double> SyntheticEncoder::originality_logits(const TokenSequence& rendered) const {
    const auto cls_it = label_to_class_.find(rendered.slot_text);
    if (cls_it == label_to_class_.end())
        throw_stage("synthetic encoder: slot filler '" + rendered.slot_text +
                    "' is not a declared label name");
    const double s = raw_score(rendered.doc_id, cls_it->second);
    const double slot_logit = std::log(s / (1.0 - s));
    std::vector<double> logits(rendered.tokens.size(), 2.0);
    for (std::size_t i = rendered.slot.begin; i < rendered.slot.end && i < logits.size(); ++i)
        logits[i] = slot_logit;
    return logits;
}

std::vector<double> SyntheticEncoder::vocabulary_logits(const TokenSequence& rendered,
                                                        std::size_t mask_index) const {
    if (mask_index >= rendered.tokens.size())
        throw_stage("synthetic encoder: mask index out of range");
    std::vector<double> logits(vocabulary_.size(), -4.0);
    for (const auto& cls : classes_)
        for (const auto& piece : cls.pieces)
            logits[vocab_index_.at(piece)] = std::log(raw_score(rendered.doc_id, cls.id));
    logits[vocab_index_.at("the")] = 0.0;  // fixed filler mass; cancels in the posterior
    return logits;
}

std::optional<std::size_t> SyntheticEncoder::vocabulary_index(const std::string& piece) const {
    const auto it = vocab_index_.find(piece);
    if (it == vocab_index_.end()) return std::nullopt;
    return it->second;
}

}  // namespace wsclass
