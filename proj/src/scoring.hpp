#pragma once

#include <cstddef>

#include "tensor.hpp"

namespace osradv {

// Familiarity scoring rules. High scores indicate familiar inputs.
enum class ScoreRule { msp, mls };

// MLS: the maximum logit. MSP: the maximum softmax probability, in (0, 1].
double score(ScoreRule rule, const Tensor& logits);

// Index of the maximal logit; ties break to the lowest index.
std::size_t argmax_class(const Tensor& logits);

// Adversarial reaction score: score(post) - score(pre). The maxima may come
// from different classes before and after the attack.
double ars(ScoreRule rule, const Tensor& logits_pre, const Tensor& logits_post);

}  // namespace osradv
