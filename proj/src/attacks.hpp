#pragma once

#include <string>
#include <vector>

#include "network.hpp"
#include "objectives.hpp"

namespace osradv {

// False Familiarity ascends the objective (push scores up), False Novelty
// descends it.
enum class AttackDirection { false_familiarity, false_novelty };

enum class AttackMethod { fgsm, bim, rprop };

const char* attack_direction_name(AttackDirection d);  // "ffam" / "fnov"
AttackDirection attack_direction_from_name(const std::string& name);
const char* attack_method_name(AttackMethod m);
AttackMethod attack_method_from_name(const std::string& name);

// +1 for false_familiarity, -1 for false_novelty.
double signed_direction(AttackDirection d);

struct BimParams {
    double alpha = 0.0;  // <= 0 resolves to epsilon / 4
    int iters = 10;
};

struct RpropParams {
    int iters = 20;
    double eta_plus = 1.2;
    double eta_minus = 0.5;
    double delta0 = 0.0;     // <= 0 resolves to epsilon / 10
    double delta_min = 1e-6;
    double delta_max = 0.0;  // <= 0 resolves to epsilon
};

struct AttackConfig {
    Objective objective = Objective::max_logit;
    AttackDirection direction = AttackDirection::false_familiarity;
    AttackMethod method = AttackMethod::fgsm;
    double epsilon = 0.1;          // L-inf budget in [0,1] pixel units
    bool clamp_data_range = true;  // keep adversarial images inside [0,1]
    BimParams bim;
    RpropParams rprop;
};

// Copy with defaults substituted; throws on invariant violations
// (epsilon > 0, alpha > 0, iters >= 1, 0 < eta_minus < 1 < eta_plus,
// 0 < delta_min <= delta0 <= delta_max).
AttackConfig resolve_config(const AttackConfig& cfg);

struct AttackResult {
    Tensor x_adv;
    int iterations_run = 0;
    // Objective value per iterate, starting at the clean input; length is
    // iterations_run + 1.
    std::vector<double> objective_trace;
    // Largest L-inf deviation from the clean input seen at any iterate.
    double linf_max = 0.0;
};

// Single signed epsilon-step along the gradient sign; exactly one gradient
// evaluation. sign(0) = 0, so zero-gradient pixels are left untouched.
AttackResult fgsm_attack(const Network& net, const AttackConfig& cfg, const Tensor& x);

// Generic iterative scheme: step rule, then per-component clip to the
// epsilon box around x, then the optional [0,1] clamp. Runs exactly the
// configured number of iterations.
AttackResult iterate_attack(const Network& net, const AttackConfig& cfg, const Tensor& x);

// Dispatch on cfg.method.
AttackResult run_attack(const Network& net, const AttackConfig& cfg, const Tensor& x);

// One component of the iRprop- rule. grad is the signed objective gradient
// (ascent form). On a sign flip the step shrinks and the component skips
// this update (gradient treated as zero, which also resets the memory).
struct RpropComponentUpdate {
    double step_size;       // resized step, within [delta_min, delta_max]
    double move_sign;       // -1, 0 or +1; displacement is step_size * move_sign
    double next_prev_grad;  // gradient value to remember for the next iteration
};

RpropComponentUpdate rprop_step_state_update(double step_size, double grad,
                                             double prev_grad, const RpropParams& p);

}  // namespace osradv
