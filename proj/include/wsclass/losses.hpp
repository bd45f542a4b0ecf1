#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace wsclass {

double sigmoid(double x);

// Numerically stable softmax (shifted by the max logit).
std::vector<double> softmax(std::span<const double> logits);

// Sequence-level objective: negative log softmax probability of the target
// class given head-token logits.
double head_token_loss(std::span<const double> logits, std::size_t target);

// d(head_token_loss)/d(logit_c) = softmax(logits)_c - [c == target].
std::vector<double> head_token_loss_grad(std::span<const double> logits, std::size_t target);

// Token-level objective on per-class probabilities p(c|d): the target class
// is pushed toward "original" and every other class toward "replaced",
//   -( log p(target) + sum_{c != target} log(1 - p(c)) ).
double prompt_bce_loss(std::span<const double> class_probs, std::size_t target);

// Gradient with respect to the pre-sigmoid logits z_c where p_c = sigmoid(z_c):
// d/dz_c = p_c - [c == target]. Identical shape to the head gradient, which is
// what makes the two views drop-in alternatives for the optimizer.
std::vector<double> prompt_bce_grad_logits(std::span<const double> class_probs, std::size_t target);

// Single binary cross-entropy term; prompt_bce_loss is exactly the sum of
// these over classes with y = [c == target].
double binary_cross_entropy(double p, bool y);

}  // namespace wsclass
