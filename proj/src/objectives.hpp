#pragma once

#include <string>

#include "network.hpp"
#include "tensor.hpp"

namespace osradv {

// Attack objectives over the logit vector. False Familiarity attacks ascend
// these, False Novelty attacks descend them.
enum class Objective {
    max_logit,  // largest logit
    two_norm,   // Euclidean norm of the logit vector
    log_msp,    // log of the maximum softmax probability
    sum_exp     // sum of exponentiated logits; keeps decreasing below zero
};

// CLI-facing names: max, 2norm, logmsp, sumexp.
const char* objective_name(Objective obj);
Objective objective_from_name(const std::string& name);

double objective_value(Objective obj, const Tensor& logits);

// Exact gradient w.r.t. the logits. two_norm is undefined at the zero
// vector and raises a numeric error there.
Tensor objective_logit_gradient(Objective obj, const Tensor& logits);

// Chain rule through the network: gradient of objective(forward(x)) w.r.t. x.
Tensor input_objective_gradient(const Network& net, Objective obj, const Tensor& x);

struct ObjectiveEval {
    double value = 0.0;
    Tensor input_grad;
};

// Fused forward + backward so iterative attacks pay one forward pass per
// gradient evaluation.
ObjectiveEval eval_objective_with_gradient(const Network& net, Objective obj,
                                           const Tensor& x);

}  // namespace osradv
