#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "wsclass/corpus.hpp"
#include "wsclass/types.hpp"

namespace wsclass {

// Which fine-tuning view a backend implements.
enum class ViewKind {
    Head,    // sequence-level: summary token into a fresh linear head
    Prompt,  // token-level: scores through the template, pre-trained head reused
};

std::string to_string(ViewKind view);

// Optimization settings for one fit call. The defaults mirror the reference
// PLM recipe; desk-scale backends override the learning rate in their
// configuration (2e-5 does nothing useful to a bag-of-words model).
struct TrainSpec {
    int epochs = 5;
    int batch_size = 32;
    double peak_learning_rate = 2e-5;
    std::string optimizer = "adamw";
    double weight_decay = 0.01;
    bool linear_decay = true;
    int frozen_layers = 0;  // must stay below the backend's encoder depth

    void validate(int encoder_depth) const;
};

// A single trainable model instance. fresh_init() hands out a new one; a fit
// call owns it exclusively. Every instance carries a process-unique id so the
// trainer can prove that nothing survives across iterations.
class Classifier {
public:
    Classifier();
    virtual ~Classifier() = default;

    virtual void fit(std::span<const LabeledDoc> examples, const TrainSpec& spec) = 0;
    virtual std::vector<Prediction> predict(const Corpus& corpus) const = 0;

    // Persists the trained state and returns the artifact path.
    virtual std::string save(const std::string& directory, const std::string& stem) const = 0;

    std::uint64_t instance_id() const { return instance_id_; }

private:
    std::uint64_t instance_id_;
};

// Factory for one fine-tuning view. fresh_init always starts from the
// pre-trained (or configured) state, never from previous fine-tuning.
class ClassifierBackend {
public:
    virtual ~ClassifierBackend() = default;

    virtual ViewKind view() const = 0;
    virtual std::string name() const = 0;
    virtual int encoder_depth() const = 0;

    virtual std::unique_ptr<Classifier> fresh_init(std::uint64_t seed) const = 0;
    virtual std::unique_ptr<Classifier> load(const std::string& artifact_path) const = 0;
};

}  // namespace wsclass
