#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "evaluation.hpp"
#include "orchestration.hpp"

namespace osradv {

struct GroupStats {
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    double p1 = 0.0;
    double p99 = 0.0;
};

enum class StatGroup { familiar = 0, novel = 1, all = 2 };
enum class StatPhase { pre = 0, post = 1 };

struct ExperimentReport {
    double auroc_pre = 0.0;
    // NaN when every post score of one class failed away; serialized null.
    double auroc_post = 0.0;
    std::optional<GroupStats> stats[3][2];  // [StatGroup][StatPhase]
    std::optional<double> ars_mls_pearson;  // over attacked samples
    std::vector<std::string> failed_sample_ids;
    std::string config_echo_json;

    const std::optional<GroupStats>& group(StatGroup g, StatPhase p) const {
        return stats[static_cast<int>(g)][static_cast<int>(p)];
    }
};

std::string plan_to_json(const AttackPlan& plan, ScoreRule rule);

ExperimentReport build_report(const std::vector<ScoredSample>& samples,
                              const AttackPlan& plan, ScoreRule rule);

// Per-sample CSV with the exact header
// sample_id,set_label,score_pre,score_post,argmax_pre,argmax_post,ars,
// attacked,method,objective,direction,eps
// Post fields are empty for failed samples; attack descriptor fields are
// empty for samples no attack was attempted on.
void write_samples_csv(const std::vector<ScoredSample>& samples,
                       const std::filesystem::path& path);

std::string summary_text(const ExperimentReport& report);
std::string summary_json(const ExperimentReport& report);

// AUROC of the adversarial reaction score used as a familiarity score. The
// raw ARS is oriented by the attack direction: a reaction in the attack's
// intended direction marks familiarity, so FNov runs rank by -ars and FFam
// runs by +ars. Samples without a post score are skipped.
double ars_familiarity_auroc(const std::vector<ScoredSample>& samples,
                             AttackDirection direction);

// Sliding ARS-vs-MLS trend per set label over attacked samples; window 0
// picks max(1, group size / 16).
struct TrendPoint {
    SetLabel set_label;
    double mls;
    double ars;
};
std::vector<TrendPoint> ars_trend(const std::vector<ScoredSample>& samples,
                                  std::size_t window);

// Shortest round-trip decimal rendering; used everywhere a double is
// written to CSV or text so artifacts are byte-stable.
std::string format_double(double v);

}  // namespace osradv
