#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wsclass/backend.hpp"
#include "wsclass/prompt_template.hpp"
#include "wsclass/tokenizer.hpp"

namespace wsclass {

struct LinearOptions {
    std::size_t feature_dim = 1u << 14;
    double init_scale = 0.01;  // stddev of the seeded weight init
};

// Desk-scale trainable backend over hashed bag-of-words features.
//
// Head view: one weight vector per class, softmax cross-entropy.
// Prompt view: a single weight vector shared by all classes, applied to the
// document rendered through the template with the class label in the slot;
// classes differ only through token x filler cross features, so the model
// scores (document, label) pairs the way a prompt head does. Trained with the
// per-class binary objective, read out through posterior normalization.
class LinearBackend : public ClassifierBackend {
public:
    // Prompt view needs a label-slot template; head view ignores it.
    LinearBackend(ViewKind view, std::vector<ClassSpec> classes,
                  std::shared_ptr<const Tokenizer> tokenizer,
                  std::optional<PromptTemplate> prompt_template = std::nullopt,
                  LinearOptions options = {});

    ViewKind view() const override { return view_; }
    std::string name() const override;
    int encoder_depth() const override { return 1; }

    std::unique_ptr<Classifier> fresh_init(std::uint64_t seed) const override;
    std::unique_ptr<Classifier> load(const std::string& artifact_path) const override;

private:
    ViewKind view_;
    std::vector<ClassSpec> classes_;
    std::shared_ptr<const Tokenizer> tokenizer_;
    std::optional<PromptTemplate> prompt_template_;
    LinearOptions options_;
};

}  // namespace wsclass
