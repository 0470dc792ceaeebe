#include "scoring.hpp"

#include "network.hpp"

namespace osradv {

std::size_t argmax_class(const Tensor& logits) {
    if (logits.size() == 0) fail_invalid("argmax of empty logits");
    std::size_t best = 0;
    for (std::size_t i = 1; i < logits.size(); ++i)
        if (logits[i] > logits[best]) best = i;
    return best;
}

double score(ScoreRule rule, const Tensor& logits) {
    if (logits.size() == 0) fail_invalid("score of empty logits");
    const std::size_t k = argmax_class(logits);
    if (rule == ScoreRule::mls) return logits[k];
    return softmax(logits)[k];
}

double ars(ScoreRule rule, const Tensor& logits_pre, const Tensor& logits_post) {
    if (logits_pre.size() != logits_post.size())
        fail_invalid("ars: logit vectors have different lengths (" +
                     std::to_string(logits_pre.size()) + " vs " +
                     std::to_string(logits_post.size()) + ")");
    return score(rule, logits_post) - score(rule, logits_pre);
}

}  // namespace osradv
