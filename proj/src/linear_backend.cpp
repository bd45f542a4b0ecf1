#include "wsclass/linear_backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

#include "wsclass/error.hpp"
#include "wsclass/losses.hpp"
#include "wsclass/util/rng.hpp"

namespace wsclass {

namespace {

using ordered_json = nlohmann::ordered_json;

// Sparse L2-normalized feature vector, indices ascending.
using Features = std::vector<std::pair<std::size_t, double>>;

Features normalize(std::map<std::size_t, double>& accum) {
    double sq = 0.0;
    for (const auto& [idx, v] : accum) sq += v * v;
    const double inv = sq > 0.0 ? 1.0 / std::sqrt(sq) : 0.0;
    Features out;
    out.reserve(accum.size());
    for (const auto& [idx, v] : accum) out.emplace_back(idx, v * inv);
    return out;
}

// Plain token counts plus a constant bias slot.
Features bag_of_words(const std::vector<std::string>& tokens, std::size_t dim) {
    std::map<std::size_t, double> accum;
    const std::uint64_t tag = rng::fnv1a("t:");
    for (const auto& tok : tokens) accum[rng::fnv1a(tok, tag) % dim] += 1.0;
    accum[rng::fnv1a("bias") % dim] += 1.0;
    return normalize(accum);
}

// Token x filler cross features over the rendered sequence, so a single
// shared weight vector can tell (document, label) pairs apart.
Features cross_features(const TokenSequence& seq, std::size_t dim) {
    std::map<std::size_t, double> accum;
    const std::uint64_t filler = rng::fnv1a(seq.slot_text, rng::fnv1a("x:"));
    for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
        if (i >= seq.slot.begin && i < seq.slot.end) continue;
        accum[rng::fnv1a(seq.tokens[i], rng::fnv1a("|", filler)) % dim] += 1.0;
    }
    accum[rng::fnv1a(seq.slot_text, rng::fnv1a("s:")) % dim] += 1.0;
    return normalize(accum);
}

double dot(const std::vector<double>& w, const Features& f) {
    double z = 0.0;
    for (const auto& [idx, v] : f) z += w[idx] * v;
    return z;
}

class LinearModel : public Classifier {
public:
    LinearModel(ViewKind view, std::vector<ClassSpec> classes,
                std::shared_ptr<const Tokenizer> tokenizer, std::optional<PromptTemplate> tmpl,
                LinearOptions options, std::uint64_t seed)
        : view_(view),
          classes_(std::move(classes)),
          tokenizer_(std::move(tokenizer)),
          template_(std::move(tmpl)),
          options_(options),
          seed_(seed) {
        const std::size_t rows = view_ == ViewKind::Head ? classes_.size() : 1;
        weights_.assign(rows, std::vector<double>(options_.feature_dim, 0.0));
        rng::Rng init(rng::mix(seed_, rng::fnv1a("linear-init")));
        for (auto& row : weights_)
            for (auto& w : row) w = options_.init_scale * init.gaussian();
    }

    void set_weights(std::vector<std::vector<double>> w) { weights_ = std::move(w); }

    void fit(std::span<const LabeledDoc> examples, const TrainSpec& spec) override {
        spec.validate(1);
        if (examples.empty()) throw_stage("linear fit: no training examples");

        std::vector<std::size_t> targets;
        targets.reserve(examples.size());
        for (const auto& ex : examples) {
            const auto it = class_index(ex.label);
            if (!it) throw_stage("linear fit: unknown label '" + ex.label + "'");
            targets.push_back(*it);
        }

        // Features never change across epochs; build them once.
        std::vector<std::vector<Features>> feats(examples.size());
        for (std::size_t i = 0; i < examples.size(); ++i) feats[i] = featurize(examples[i]);

        const std::size_t n = examples.size();
        const std::size_t batch = static_cast<std::size_t>(spec.batch_size);
        const std::size_t steps_per_epoch = (n + batch - 1) / batch;
        const std::size_t total_steps = steps_per_epoch * static_cast<std::size_t>(spec.epochs);

        std::vector<std::vector<double>> grad(weights_.size()),
            moment1(weights_.size()), moment2(weights_.size());
        for (std::size_t r = 0; r < weights_.size(); ++r) {
            grad[r].assign(options_.feature_dim, 0.0);
            moment1[r].assign(options_.feature_dim, 0.0);
            moment2[r].assign(options_.feature_dim, 0.0);
        }

        rng::Rng order(rng::mix(seed_, rng::fnv1a("batch-order")));
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);

        const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
        std::size_t step = 0;
        for (int epoch = 0; epoch < spec.epochs; ++epoch) {
            order.shuffle(perm);
            for (std::size_t start = 0; start < n; start += batch) {
                const std::size_t end = std::min(n, start + batch);
                for (auto& row : grad) std::fill(row.begin(), row.end(), 0.0);
                const double inv_batch = 1.0 / static_cast<double>(end - start);

                for (std::size_t b = start; b < end; ++b) {
                    const std::size_t i = perm[b];
                    accumulate_example(feats[i], targets[i], inv_batch, grad);
                }

                double lr = spec.peak_learning_rate;
                if (spec.linear_decay)
                    lr *= 1.0 - static_cast<double>(step) / static_cast<double>(total_steps);
                ++step;
                const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
                const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));

                for (std::size_t r = 0; r < weights_.size(); ++r) {
                    auto& w = weights_[r];
                    auto& g = grad[r];
                    auto& m1 = moment1[r];
                    auto& m2 = moment2[r];
                    for (std::size_t d = 0; d < options_.feature_dim; ++d) {
                        m1[d] = beta1 * m1[d] + (1.0 - beta1) * g[d];
                        m2[d] = beta2 * m2[d] + (1.0 - beta2) * g[d] * g[d];
                        const double update = (m1[d] / bc1) / (std::sqrt(m2[d] / bc2) + eps);
                        w[d] -= lr * (update + spec.weight_decay * w[d]);
                    }
                }
            }
        }
    }

    std::vector<Prediction> predict(const Corpus& corpus) const override {
        std::vector<Prediction> out;
        out.reserve(corpus.size());
        for (const auto& doc : corpus.documents()) {
            const std::vector<double> probs = class_probabilities(doc);
            std::size_t best = 0;
            for (std::size_t c = 1; c < probs.size(); ++c)
                if (probs[c] > probs[best]) best = c;  // first declared class wins ties
            out.push_back(Prediction{doc.id, classes_[best].id, probs[best]});
        }
        return out;
    }

    std::string save(const std::string& directory, const std::string& stem) const override {
        std::filesystem::create_directories(directory);
        const std::string path = (std::filesystem::path(directory) / (stem + ".json")).string();
        ordered_json j;
        j["format"] = "linear-classifier";
        j["view"] = to_string(view_);
        j["feature_dim"] = options_.feature_dim;
        j["classes"] = ordered_json::array();
        for (const auto& c : classes_) j["classes"].push_back(c.id);
        j["template"] = template_ ? ordered_json(template_->pattern()) : ordered_json(nullptr);
        j["weights"] = weights_;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw_stage("cannot write classifier artifact '" + path + "'");
        out << j.dump() << '\n';
        if (!out) throw_stage("short write on classifier artifact '" + path + "'");
        return path;
    }

    // Per-class probabilities: softmax over head logits, or normalized
    // per-class sigmoid scores for the prompt view.
    std::vector<double> class_probabilities(const Document& doc) const {
        if (view_ == ViewKind::Head) {
            const Features f = bag_of_words(tokenizer_->tokenize(doc.text), options_.feature_dim);
            std::vector<double> logits(classes_.size());
            for (std::size_t c = 0; c < classes_.size(); ++c) logits[c] = dot(weights_[c], f);
            return softmax(logits);
        }
        std::vector<double> scores(classes_.size());
        double sum = 0.0;
        for (std::size_t c = 0; c < classes_.size(); ++c) {
            const TokenSequence seq =
                render(*template_, doc, classes_[c].label_name, *tokenizer_);
            scores[c] = sigmoid(dot(weights_[0], cross_features(seq, options_.feature_dim)));
            sum += scores[c];
        }
        for (auto& p : scores) p /= sum;  // sigmoid is never zero, so sum > 0
        return scores;
    }

private:
    std::optional<std::size_t> class_index(const ClassId& id) const {
        for (std::size_t c = 0; c < classes_.size(); ++c)
            if (classes_[c].id == id) return c;
        return std::nullopt;
    }

    // Head view: one shared feature vector. Prompt view: one per class.
    std::vector<Features> featurize(const LabeledDoc& ex) const {
        if (view_ == ViewKind::Head)
            return {bag_of_words(tokenizer_->tokenize(ex.text), options_.feature_dim)};
        std::vector<Features> per_class;
        per_class.reserve(classes_.size());
        const Document doc{ex.doc_id, ex.text};
        for (const auto& cls : classes_)
            per_class.push_back(
                cross_features(render(*template_, doc, cls.label_name, *tokenizer_),
                               options_.feature_dim));
        return per_class;
    }

    void accumulate_example(const std::vector<Features>& feats, std::size_t target,
                            double scale, std::vector<std::vector<double>>& grad) const {
        if (view_ == ViewKind::Head) {
            std::vector<double> logits(classes_.size());
            for (std::size_t c = 0; c < classes_.size(); ++c)
                logits[c] = dot(weights_[c], feats[0]);
            const std::vector<double> g = head_token_loss_grad(logits, target);
            for (std::size_t c = 0; c < classes_.size(); ++c)
                for (const auto& [idx, v] : feats[0]) grad[c][idx] += scale * g[c] * v;
            return;
        }
        std::vector<double> probs(classes_.size());
        for (std::size_t c = 0; c < classes_.size(); ++c)
            probs[c] = sigmoid(dot(weights_[0], feats[c]));
        const std::vector<double> g = prompt_bce_grad_logits(probs, target);
        for (std::size_t c = 0; c < classes_.size(); ++c)
            for (const auto& [idx, v] : feats[c]) grad[0][idx] += scale * g[c] * v;
    }

    ViewKind view_;
    std::vector<ClassSpec> classes_;
    std::shared_ptr<const Tokenizer> tokenizer_;
    std::optional<PromptTemplate> template_;
    LinearOptions options_;
    std::uint64_t seed_ = 0;
    std::vector<std::vector<double>> weights_;
};

}  // namespace

LinearBackend::LinearBackend(ViewKind view, std::vector<ClassSpec> classes,
                             std::shared_ptr<const Tokenizer> tokenizer,
                             std::optional<PromptTemplate> prompt_template, LinearOptions options)
    : view_(view),
      classes_(std::move(classes)),
      tokenizer_(std::move(tokenizer)),
      prompt_template_(std::move(prompt_template)),
      options_(options) {
    if (classes_.size() < 2) throw_config("linear backend: need at least two classes");
    if (!tokenizer_) throw_config("linear backend: tokenizer is required");
    if (options_.feature_dim < 2) throw_config("linear backend: feature_dim too small");
    if (view_ == ViewKind::Prompt) {
        if (!prompt_template_) throw_config("linear prompt backend: template is required");
        if (prompt_template_->slot_kind() != SlotKind::Label)
            throw_config("linear prompt backend: needs a label-slot template");
    }
}

std::string LinearBackend::name() const {
    return view_ == ViewKind::Head ? "linear_head" : "linear_prompt";
}

std::unique_ptr<Classifier> LinearBackend::fresh_init(std::uint64_t seed) const {
    return std::make_unique<LinearModel>(view_, classes_, tokenizer_, prompt_template_, options_,
                                         seed);
}

std::unique_ptr<Classifier> LinearBackend::load(const std::string& artifact_path) const {
    std::ifstream in(artifact_path, std::ios::binary);
    if (!in) throw_data("cannot read classifier artifact '" + artifact_path + "'");
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw_data("classifier artifact '" + artifact_path + "': " + e.what());
    }
    if (j.value("format", "") != "linear-classifier")
        throw_data("classifier artifact '" + artifact_path + "' has the wrong format tag");
    if (j.value("view", "") != to_string(view_))
        throw_data("classifier artifact '" + artifact_path + "' was trained for view '" +
                   j.value("view", "") + "', backend is '" + to_string(view_) + "'");
    if (j.value("feature_dim", std::size_t{0}) != options_.feature_dim)
        throw_data("classifier artifact '" + artifact_path + "' feature_dim mismatch");
    std::vector<ClassId> ids = j.value("classes", std::vector<ClassId>{});
    if (ids.size() != classes_.size())
        throw_data("classifier artifact '" + artifact_path + "' class set mismatch");
    for (std::size_t c = 0; c < ids.size(); ++c)
        if (ids[c] != classes_[c].id)
            throw_data("classifier artifact '" + artifact_path + "' class set mismatch");
    auto weights = j.value("weights", std::vector<std::vector<double>>{});
    if (weights.size() != (view_ == ViewKind::Head ? classes_.size() : 1))
        throw_data("classifier artifact '" + artifact_path + "' weight shape mismatch");
    for (const auto& row : weights)
        if (row.size() != options_.feature_dim)
            throw_data("classifier artifact '" + artifact_path + "' weight shape mismatch");

    auto model = std::make_unique<LinearModel>(view_, classes_, tokenizer_, prompt_template_,
                                               options_, /*seed=*/0);
    model->set_weights(std::move(weights));
    return model;
}

}  // namespace wsclass
