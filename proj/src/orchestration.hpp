#pragma once

#include <optional>
#include <string>
#include <vector>

#include "attacks.hpp"
#include "dataset.hpp"
#include "scoring.hpp"

namespace osradv {

enum class PlanSetting { informed, uninformed };

const char* plan_setting_name(PlanSetting s);
PlanSetting plan_setting_from_name(const std::string& name);

// Which attack hits which subset. Uninformed adversaries apply one attack
// to every image; informed adversaries know the set labels and only attack
// the subset whose score movement flips the ranking (FFam on novel, FNov on
// familiar).
struct AttackPlan {
    PlanSetting setting = PlanSetting::uninformed;
    std::optional<AttackConfig> ffam;  // direction must be false_familiarity
    std::optional<AttackConfig> fnov;  // direction must be false_novelty
};

// Throws unless the plan satisfies its invariants: uninformed has exactly
// one config, informed at least one, and the direction fields agree with
// the slots.
void validate_plan(const AttackPlan& plan);

struct AppliedAttack {
    AttackMethod method;
    Objective objective;
    AttackDirection direction;
    double epsilon;
};

struct ScoredSample {
    std::string sample_id;
    SetLabel set_label = SetLabel::familiar;
    double score_pre = 0.0;
    std::optional<double> score_post;  // absent only when the attack failed
    std::uint32_t argmax_pre = 0;
    std::optional<std::uint32_t> argmax_post;
    bool attacked = false;                // an attack was attempted
    std::optional<AppliedAttack> applied; // what was attempted, if anything
    std::string error;                    // non-empty iff the attack failed

    bool failed() const { return attacked && !score_post.has_value(); }
    // 0 for unattacked samples by construction (score_post == score_pre).
    std::optional<double> ars() const {
        if (!score_post) return std::nullopt;
        return *score_post - score_pre;
    }
};

// Scores every sample before the attack, routes attacks per the plan, and
// rescores. Per-sample attack errors are recorded, not propagated. Samples
// may be attacked concurrently (threads = 0 picks the hardware count);
// results are sorted by sample_id and independent of the thread count.
std::vector<ScoredSample> run_plan(const Network& net, const AttackPlan& plan,
                                   const Dataset& data, ScoreRule rule,
                                   unsigned threads = 0);

// Clean scoring pass: no attacks, score_post mirrors score_pre.
std::vector<ScoredSample> score_dataset(const Network& net, const Dataset& data,
                                        ScoreRule rule, unsigned threads = 0);

}  // namespace osradv
