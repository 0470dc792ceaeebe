#include "objectives.hpp"

#include <cmath>

#include "scoring.hpp"

namespace osradv {

namespace {

// Per-component guard for sum-exp; exp(700) is still finite in 64-bit but
// close to the edge, anything above is rejected instead of returning Inf.
constexpr double kSumExpLogitLimit = 700.0;

void check_nonempty_finite(const Tensor& logits) {
    if (logits.size() == 0) fail_invalid("objective over empty logits");
    require_finite(logits, "logits");
}

}  // namespace

const char* objective_name(Objective obj) {
    switch (obj) {
        case Objective::max_logit: return "max";
        case Objective::two_norm: return "2norm";
        case Objective::log_msp: return "logmsp";
        case Objective::sum_exp: return "sumexp";
    }
    return "?";
}

Objective objective_from_name(const std::string& name) {
    if (name == "max") return Objective::max_logit;
    if (name == "2norm") return Objective::two_norm;
    if (name == "logmsp") return Objective::log_msp;
    if (name == "sumexp") return Objective::sum_exp;
    fail_invalid("unknown objective '" + name + "' (expected max, 2norm, logmsp, sumexp)");
}

double objective_value(Objective obj, const Tensor& logits) {
    check_nonempty_finite(logits);
    switch (obj) {
        case Objective::max_logit:
            return logits[argmax_class(logits)];
        case Objective::two_norm: {
            double acc = 0.0;
            for (std::size_t i = 0; i < logits.size(); ++i) acc += logits[i] * logits[i];
            return std::sqrt(acc);
        }
        case Objective::log_msp: {
            // log max softmax = z_max - logsumexp(z), evaluated stably.
            const double m = logits[argmax_class(logits)];
            double sum = 0.0;
            for (std::size_t i = 0; i < logits.size(); ++i) sum += std::exp(logits[i] - m);
            return -std::log(sum);
        }
        case Objective::sum_exp: {
            double acc = 0.0;
            for (std::size_t i = 0; i < logits.size(); ++i) {
                if (logits[i] > kSumExpLogitLimit)
                    fail_numeric("sum-exp objective overflow: logit " + std::to_string(i) +
                                 " exceeds " + std::to_string(kSumExpLogitLimit));
                acc += std::exp(logits[i]);
            }
            if (!std::isfinite(acc)) fail_numeric("sum-exp objective overflow");
            return acc;
        }
    }
    fail_invalid("unreachable objective kind");
}

Tensor objective_logit_gradient(Objective obj, const Tensor& logits) {
    check_nonempty_finite(logits);
    switch (obj) {
        case Objective::max_logit: {
            Tensor g(logits.shape());
            g[argmax_class(logits)] = 1.0;
            return g;
        }
        case Objective::two_norm: {
            double norm = objective_value(Objective::two_norm, logits);
            if (norm == 0.0) fail_numeric("gradient undefined at zero logits");
            Tensor g(logits.shape());
            for (std::size_t i = 0; i < logits.size(); ++i) g[i] = logits[i] / norm;
            return g;
        }
        case Objective::log_msp: {
            Tensor g = softmax(logits);
            for (std::size_t i = 0; i < g.size(); ++i) g[i] = -g[i];
            g[argmax_class(logits)] += 1.0;
            return g;
        }
        case Objective::sum_exp: {
            Tensor g(logits.shape());
            for (std::size_t i = 0; i < logits.size(); ++i) {
                if (logits[i] > kSumExpLogitLimit)
                    fail_numeric("sum-exp objective overflow: logit " + std::to_string(i) +
                                 " exceeds " + std::to_string(kSumExpLogitLimit));
                g[i] = std::exp(logits[i]);
            }
            return g;
        }
    }
    fail_invalid("unreachable objective kind");
}

Tensor input_objective_gradient(const Network& net, Objective obj, const Tensor& x) {
    return eval_objective_with_gradient(net, obj, x).input_grad;
}

ObjectiveEval eval_objective_with_gradient(const Network& net, Objective obj,
                                           const Tensor& x) {
    net.require_input(x);
    const std::vector<Tensor> trace = detail::forward_trace(net.layers(), x);
    const Tensor& logits = trace.back();
    ObjectiveEval out;
    out.value = objective_value(obj, logits);
    const Tensor upstream = objective_logit_gradient(obj, logits);
    out.input_grad = detail::backward_from_trace(net.layers(), trace, upstream, nullptr);
    return out;
}

}  // namespace osradv
