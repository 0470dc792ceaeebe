#include "attacks.hpp"

#include <algorithm>
#include <cmath>

namespace osradv {

namespace {

double sgn(double v) { return static_cast<double>(v > 0.0) - static_cast<double>(v < 0.0); }

constexpr double kBudgetSlack = 1e-12;

void check_attack_input(const Network& net, const AttackConfig& cfg, const Tensor& x) {
    net.require_input(x);
    require_finite(x, "attack input");
    if (cfg.clamp_data_range) {
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] < 0.0 || x[i] > 1.0)
                fail_invalid("attack input outside [0,1] at component " + std::to_string(i) +
                             " with clamp_data_range enabled");
    }
}

// Tracks the running L-inf deviation and enforces the budget at every
// iterate, not only on the final output.
double update_linf(const Tensor& x, const Tensor& cur, double eps, double linf_max,
                   int iteration) {
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::fabs(cur[i] - x[i]));
    if (d > eps + kBudgetSlack)
        fail_numeric("internal: L-inf budget violated at iteration " +
                     std::to_string(iteration));
    return std::max(linf_max, d);
}

}  // namespace

const char* attack_direction_name(AttackDirection d) {
    return d == AttackDirection::false_familiarity ? "ffam" : "fnov";
}

AttackDirection attack_direction_from_name(const std::string& name) {
    if (name == "ffam") return AttackDirection::false_familiarity;
    if (name == "fnov") return AttackDirection::false_novelty;
    fail_invalid("unknown attack direction '" + name + "' (expected ffam or fnov)");
}

const char* attack_method_name(AttackMethod m) {
    switch (m) {
        case AttackMethod::fgsm: return "fgsm";
        case AttackMethod::bim: return "bim";
        case AttackMethod::rprop: return "rprop";
    }
    return "?";
}

AttackMethod attack_method_from_name(const std::string& name) {
    if (name == "fgsm") return AttackMethod::fgsm;
    if (name == "bim") return AttackMethod::bim;
    if (name == "rprop") return AttackMethod::rprop;
    fail_invalid("unknown attack method '" + name + "' (expected fgsm, bim, rprop)");
}

double signed_direction(AttackDirection d) {
    return d == AttackDirection::false_familiarity ? 1.0 : -1.0;
}

AttackConfig resolve_config(const AttackConfig& cfg) {
    AttackConfig r = cfg;
    if (!(r.epsilon > 0.0)) fail_invalid("attack epsilon must be > 0");
    if (r.bim.alpha <= 0.0) r.bim.alpha = r.epsilon / 4.0;
    if (r.bim.iters < 1) fail_invalid("bim iteration count must be >= 1");
    if (r.rprop.iters < 1) fail_invalid("rprop iteration count must be >= 1");
    if (r.rprop.delta0 <= 0.0) r.rprop.delta0 = r.epsilon / 10.0;
    if (r.rprop.delta_max <= 0.0) r.rprop.delta_max = r.epsilon;
    if (!(r.rprop.eta_minus > 0.0 && r.rprop.eta_minus < 1.0 && r.rprop.eta_plus > 1.0))
        fail_invalid("rprop requires 0 < eta_minus < 1 < eta_plus");
    if (!(r.rprop.delta_min > 0.0 && r.rprop.delta_min <= r.rprop.delta0 &&
          r.rprop.delta0 <= r.rprop.delta_max))
        fail_invalid("rprop requires 0 < delta_min <= delta0 <= delta_max");
    return r;
}

RpropComponentUpdate rprop_step_state_update(double step_size, double grad,
                                             double prev_grad, const RpropParams& p) {
    RpropComponentUpdate u{step_size, 0.0, grad};
    const double product = grad * prev_grad;
    if (product > 0.0) {
        u.step_size = std::min(step_size * p.eta_plus, p.delta_max);
    } else if (product < 0.0) {
        u.step_size = std::max(step_size * p.eta_minus, p.delta_min);
        u.next_prev_grad = 0.0;  // iRprop-: forget the flipped gradient
        u.move_sign = 0.0;       // and skip this component for one update
        return u;
    }
    u.move_sign = sgn(grad);
    return u;
}

AttackResult fgsm_attack(const Network& net, const AttackConfig& cfg, const Tensor& x) {
    const AttackConfig rc = resolve_config(cfg);
    check_attack_input(net, rc, x);

    const double s = signed_direction(rc.direction);
    const ObjectiveEval eval = eval_objective_with_gradient(net, rc.objective, x);
    if (!eval.input_grad.all_finite())
        fail_numeric("non-finite gradient at iteration 0");

    AttackResult result;
    result.x_adv = x;
    for (std::size_t i = 0; i < x.size(); ++i)
        result.x_adv[i] = x[i] + rc.epsilon * sgn(s * eval.input_grad[i]);
    if (rc.clamp_data_range)
        for (std::size_t i = 0; i < result.x_adv.size(); ++i)
            result.x_adv[i] = std::min(std::max(result.x_adv[i], 0.0), 1.0);

    result.iterations_run = 1;
    result.linf_max = update_linf(x, result.x_adv, rc.epsilon, 0.0, 1);
    result.objective_trace = {eval.value,
                              objective_value(rc.objective, net.forward(result.x_adv))};
    return result;
}

AttackResult iterate_attack(const Network& net, const AttackConfig& cfg, const Tensor& x) {
    const AttackConfig rc = resolve_config(cfg);
    if (rc.method != AttackMethod::bim && rc.method != AttackMethod::rprop)
        fail_invalid("iterate_attack requires method bim or rprop");
    check_attack_input(net, rc, x);

    const double s = signed_direction(rc.direction);
    const bool is_rprop = rc.method == AttackMethod::rprop;
    const int iters = is_rprop ? rc.rprop.iters : rc.bim.iters;

    AttackResult result;
    result.x_adv = x;
    result.objective_trace.reserve(static_cast<std::size_t>(iters) + 1);

    std::vector<double> step_size;
    std::vector<double> prev_grad;
    if (is_rprop) {
        step_size.assign(x.size(), rc.rprop.delta0);
        prev_grad.assign(x.size(), 0.0);
    }

    Tensor& cur = result.x_adv;
    for (int n = 0; n < iters; ++n) {
        ObjectiveEval eval;
        try {
            eval = eval_objective_with_gradient(net, rc.objective, cur);
        } catch (const Error& e) {
            throw Error(e.kind(), "iteration " + std::to_string(n) + ": " + e.what());
        }
        if (!eval.input_grad.all_finite())
            fail_numeric("non-finite gradient at iteration " + std::to_string(n));
        result.objective_trace.push_back(eval.value);

        for (std::size_t i = 0; i < cur.size(); ++i) {
            const double g = s * eval.input_grad[i];
            if (is_rprop) {
                const RpropComponentUpdate u =
                    rprop_step_state_update(step_size[i], g, prev_grad[i], rc.rprop);
                step_size[i] = u.step_size;
                prev_grad[i] = u.next_prev_grad;
                cur[i] += u.step_size * u.move_sign;
            } else {
                cur[i] += rc.bim.alpha * sgn(g);
            }
            // Clip to the epsilon box around the original input.
            cur[i] = std::min(std::max(cur[i], x[i] - rc.epsilon), x[i] + rc.epsilon);
            if (rc.clamp_data_range) cur[i] = std::min(std::max(cur[i], 0.0), 1.0);
        }
        result.linf_max = update_linf(x, cur, rc.epsilon, result.linf_max, n + 1);
    }

    result.iterations_run = iters;
    result.objective_trace.push_back(objective_value(rc.objective, net.forward(cur)));
    return result;
}

AttackResult run_attack(const Network& net, const AttackConfig& cfg, const Tensor& x) {
    if (cfg.method == AttackMethod::fgsm) return fgsm_attack(net, cfg, x);
    return iterate_attack(net, cfg, x);
}

}  // namespace osradv
