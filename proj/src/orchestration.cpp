#include "orchestration.hpp"

#include <algorithm>

#include "parallel.hpp"

namespace osradv {

const char* plan_setting_name(PlanSetting s) {
    return s == PlanSetting::informed ? "informed" : "uninformed";
}

PlanSetting plan_setting_from_name(const std::string& name) {
    if (name == "informed") return PlanSetting::informed;
    if (name == "uninformed") return PlanSetting::uninformed;
    fail_invalid("unknown setting '" + name + "' (expected informed or uninformed)");
}

void validate_plan(const AttackPlan& plan) {
    if (plan.ffam && plan.ffam->direction != AttackDirection::false_familiarity)
        fail_invalid("plan's ffam config must have direction false_familiarity");
    if (plan.fnov && plan.fnov->direction != AttackDirection::false_novelty)
        fail_invalid("plan's fnov config must have direction false_novelty");
    const int present = (plan.ffam ? 1 : 0) + (plan.fnov ? 1 : 0);
    if (plan.setting == PlanSetting::uninformed && present != 1)
        fail_invalid("uninformed plans apply exactly one attack to all images");
    if (plan.setting == PlanSetting::informed && present == 0)
        fail_invalid("informed plans need at least one attack config");
}

namespace {

// Uninformed: the single config, regardless of set label. Informed: FFam
// only on novel images, FNov only on familiar ones; off-target samples are
// left unchanged.
const AttackConfig* config_for(const AttackPlan& plan, SetLabel label) {
    if (plan.setting == PlanSetting::uninformed)
        return plan.ffam ? &*plan.ffam : &*plan.fnov;
    if (label == SetLabel::novel) return plan.ffam ? &*plan.ffam : nullptr;
    return plan.fnov ? &*plan.fnov : nullptr;
}

}  // namespace

namespace {

std::vector<ScoredSample> run_impl(const Network& net, const AttackPlan* plan,
                                   const Dataset& data, ScoreRule rule,
                                   unsigned threads) {
    if (data.samples.empty()) fail_invalid("run over an empty dataset");

    std::vector<ScoredSample> results(data.samples.size());
    parallel_for(data.samples.size(), threads, [&](std::size_t i) {
        const Sample& sample = data.samples[i];
        ScoredSample& out = results[i];
        out.sample_id = sample.id;
        out.set_label = sample.set_label;

        const Tensor logits_pre = net.forward(sample.image);
        out.score_pre = score(rule, logits_pre);
        out.argmax_pre = static_cast<std::uint32_t>(argmax_class(logits_pre));

        const AttackConfig* cfg = plan ? config_for(*plan, sample.set_label) : nullptr;
        if (!cfg) {
            out.score_post = out.score_pre;
            out.argmax_post = out.argmax_pre;
            return;
        }

        out.attacked = true;
        out.applied = AppliedAttack{cfg->method, cfg->objective, cfg->direction,
                                    cfg->epsilon};
        try {
            const AttackResult attack = run_attack(net, *cfg, sample.image);
            const Tensor logits_post = net.forward(attack.x_adv);
            out.score_post = score(rule, logits_post);
            out.argmax_post = static_cast<std::uint32_t>(argmax_class(logits_post));
        } catch (const Error& e) {
            out.error = e.what();
        }
    });

    std::sort(results.begin(), results.end(),
              [](const ScoredSample& a, const ScoredSample& b) {
                  return a.sample_id < b.sample_id;
              });
    return results;
}

}  // namespace

std::vector<ScoredSample> run_plan(const Network& net, const AttackPlan& plan,
                                   const Dataset& data, ScoreRule rule,
                                   unsigned threads) {
    validate_plan(plan);
    return run_impl(net, &plan, data, rule, threads);
}

std::vector<ScoredSample> score_dataset(const Network& net, const Dataset& data,
                                        ScoreRule rule, unsigned threads) {
    return run_impl(net, nullptr, data, rule, threads);
}

}  // namespace osradv
