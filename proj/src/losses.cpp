#include "wsclass/losses.hpp"

#include <algorithm>
#include <cmath>

#include "wsclass/error.hpp"

namespace wsclass {

namespace {
// Probabilities are clamped away from 0/1 before logs so that a saturated
// scorer yields a large finite loss instead of inf.
constexpr double kProbEps = 1e-12;

double clamp_prob(double p) { return std::min(1.0 - kProbEps, std::max(kProbEps, p)); }
}  // namespace

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

std::vector<double> softmax(std::span<const double> logits) {
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - max_logit);
        sum += out[i];
    }
    for (auto& v : out) v /= sum;
    return out;
}

double head_token_loss(std::span<const double> logits, std::size_t target) {
    if (target >= logits.size()) throw_stage("head loss: target index out of range");
    return -std::log(clamp_prob(softmax(logits)[target]));
}

std::vector<double> head_token_loss_grad(std::span<const double> logits, std::size_t target) {
    auto grad = softmax(logits);
    grad[target] -= 1.0;
    return grad;
}

double binary_cross_entropy(double p, bool y) {
    return y ? -std::log(clamp_prob(p)) : -std::log(clamp_prob(1.0 - p));
}

double prompt_bce_loss(std::span<const double> class_probs, std::size_t target) {
    if (target >= class_probs.size()) throw_stage("prompt loss: target index out of range");
    double loss = 0.0;
    for (std::size_t c = 0; c < class_probs.size(); ++c)
        loss += binary_cross_entropy(class_probs[c], c == target);
    return loss;
}

std::vector<double> prompt_bce_grad_logits(std::span<const double> class_probs,
                                           std::size_t target) {
    if (target >= class_probs.size()) throw_stage("prompt loss: target index out of range");
    std::vector<double> grad(class_probs.begin(), class_probs.end());
    grad[target] -= 1.0;
    return grad;
}

}  // namespace wsclass
