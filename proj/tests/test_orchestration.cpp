#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "orchestration.hpp"
#include "report.hpp"
#include "support/test_support.hpp"
#include "trainer.hpp"

using namespace osradv;
using namespace testsupport;

namespace {

// Two familiar + two novel tiny samples over a 2-pixel input.
Dataset four_sample_set() {
    std::vector<Sample> samples;
    samples.push_back({"f0", Tensor::from_vector({0.2, 0.3}), 0u, SetLabel::familiar});
    samples.push_back({"f1", Tensor::from_vector({0.6, 0.1}), 1u, SetLabel::familiar});
    samples.push_back({"n0", Tensor::from_vector({0.4, 0.9}), std::nullopt,
                       SetLabel::novel});
    samples.push_back({"n1", Tensor::from_vector({0.8, 0.5}), std::nullopt,
                       SetLabel::novel});
    return Dataset::from_samples(std::move(samples));
}

Network small_net() {
    DenseLayer dense{Tensor({2, 2}, {1.0, 0.5, -0.5, 1.0}), Tensor({2}, {0.1, -0.1})};
    return Network({dense}, {2});
}

AttackConfig cfg_for(AttackDirection dir, double eps = 0.05) {
    AttackConfig cfg;
    cfg.method = AttackMethod::fgsm;
    cfg.objective = Objective::max_logit;
    cfg.direction = dir;
    cfg.epsilon = eps;
    return cfg;
}

}  // namespace

TEST_CASE("run_plan: informed routing attacks exactly the right subsets") {
    const Network net = small_net();
    const Dataset data = four_sample_set();
    AttackPlan plan;
    plan.setting = PlanSetting::informed;
    plan.ffam = cfg_for(AttackDirection::false_familiarity);
    plan.fnov = cfg_for(AttackDirection::false_novelty);

    const auto results = run_plan(net, plan, data, ScoreRule::mls);
    REQUIRE(results.size() == 4);

    int ffam_runs = 0, fnov_runs = 0;
    for (const ScoredSample& s : results) {
        REQUIRE(s.attacked);
        REQUIRE(s.applied.has_value());
        if (s.applied->direction == AttackDirection::false_familiarity) {
            ++ffam_runs;
            CHECK(s.set_label == SetLabel::novel);
        } else {
            ++fnov_runs;
            CHECK(s.set_label == SetLabel::familiar);
        }
    }
    CHECK(ffam_runs == 2);
    CHECK(fnov_runs == 2);
}

TEST_CASE("run_plan: uninformed applies the one config everywhere") {
    const Network net = small_net();
    const Dataset data = four_sample_set();
    AttackPlan plan;
    plan.setting = PlanSetting::uninformed;
    plan.ffam = cfg_for(AttackDirection::false_familiarity);

    const auto results = run_plan(net, plan, data, ScoreRule::mls);
    int ffam_runs = 0;
    for (const ScoredSample& s : results) {
        CHECK(s.attacked);
        CHECK(s.applied->direction == AttackDirection::false_familiarity);
        ++ffam_runs;
    }
    CHECK(ffam_runs == 4);
}

TEST_CASE("run_plan: informed with one config leaves the off-target subset alone") {
    const Network net = small_net();
    const Dataset data = four_sample_set();
    AttackPlan plan;
    plan.setting = PlanSetting::informed;
    plan.fnov = cfg_for(AttackDirection::false_novelty);

    const auto results = run_plan(net, plan, data, ScoreRule::mls);
    for (const ScoredSample& s : results) {
        if (s.set_label == SetLabel::novel) {
            CHECK_FALSE(s.attacked);
            CHECK(*s.score_post == s.score_pre);
            CHECK(*s.argmax_post == s.argmax_pre);
        } else {
            CHECK(s.attacked);
        }
    }
}

TEST_CASE("run_plan: results are keyed by sample id, independent of thread count") {
    Rng rng(42);
    const Network net = random_toy_net(rng, 6, 3);
    std::vector<Sample> samples;
    for (int i = 0; i < 24; ++i) {
        char id[16];
        std::snprintf(id, sizeof(id), "s%03d", i);
        const bool familiar = i % 2 == 0;
        samples.push_back({id, random_tensor({1, 6, 6}, rng),
                           familiar ? std::optional<std::uint32_t>(0u) : std::nullopt,
                           familiar ? SetLabel::familiar : SetLabel::novel});
    }
    const Dataset data = Dataset::from_samples(std::move(samples));

    AttackPlan plan;
    plan.setting = PlanSetting::uninformed;
    plan.fnov = cfg_for(AttackDirection::false_novelty, 0.08);

    const auto serial = run_plan(net, plan, data, ScoreRule::mls, 1);
    const auto parallel = run_plan(net, plan, data, ScoreRule::mls, 4);

    REQUIRE(serial.size() == parallel.size());
    REQUIRE(serial.size() == data.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].sample_id == parallel[i].sample_id);
        CHECK(serial[i].score_pre == parallel[i].score_pre);
        CHECK(*serial[i].score_post == *parallel[i].score_post);
        if (i > 0) CHECK(serial[i - 1].sample_id < serial[i].sample_id);
    }
}

TEST_CASE("run_plan: a vanishing perturbation leaves scores in place") {
    const Network net = small_net();
    const Dataset data = four_sample_set();
    AttackPlan plan;
    plan.setting = PlanSetting::uninformed;
    plan.ffam = cfg_for(AttackDirection::false_familiarity, 1e-12);

    const auto results = run_plan(net, plan, data, ScoreRule::mls);
    for (const ScoredSample& s : results)
        CHECK(std::fabs(*s.score_post - s.score_pre) <= 1e-9);
}

TEST_CASE("run_plan: zero-gradient attacks reproduce the clean auroc exactly") {
    // All-zero weights with distinct biases: logits are input-independent,
    // every attack returns x unchanged.
    DenseLayer dense{Tensor({2, 2}, {0, 0, 0, 0}), Tensor({2}, {0.4, 0.1})};
    const Network net({dense}, {2});
    const Dataset data = four_sample_set();

    AttackPlan plan;
    plan.setting = PlanSetting::uninformed;
    plan.ffam = cfg_for(AttackDirection::false_familiarity, 0.3);

    const auto results = run_plan(net, plan, data, ScoreRule::mls);
    const ExperimentReport report = build_report(results, plan, ScoreRule::mls);
    CHECK(report.auroc_pre == report.auroc_post);
    for (const ScoredSample& s : results) CHECK(*s.score_post == s.score_pre);
}

TEST_CASE("run_plan: per-sample failures are recorded, not fatal") {
    // logits = [x0 - 0.5, 0]: the first sample lands exactly on the zero
    // vector, which the 2-norm gradient rejects; the second sample works.
    DenseLayer dense{Tensor({2, 2}, {1, 0, 0, 0}), Tensor({2}, {-0.5, 0.0})};
    const Network net({dense}, {2});

    std::vector<Sample> samples;
    samples.push_back({"bad", Tensor::from_vector({0.5, 0.5}), 0u, SetLabel::familiar});
    samples.push_back({"good", Tensor::from_vector({0.9, 0.5}), std::nullopt,
                       SetLabel::novel});
    const Dataset data = Dataset::from_samples(std::move(samples));

    AttackPlan plan;
    plan.setting = PlanSetting::uninformed;
    AttackConfig cfg = cfg_for(AttackDirection::false_familiarity, 0.05);
    cfg.objective = Objective::two_norm;
    plan.ffam = cfg;

    const auto results = run_plan(net, plan, data, ScoreRule::mls);
    REQUIRE(results.size() == 2);
    const ScoredSample& bad = results[0].sample_id == "bad" ? results[0] : results[1];
    const ScoredSample& good = results[0].sample_id == "bad" ? results[1] : results[0];

    CHECK(bad.failed());
    CHECK_FALSE(bad.score_post.has_value());
    CHECK(bad.error.find("zero logits") != std::string::npos);
    CHECK_FALSE(good.failed());
    CHECK(good.score_post.has_value());
}

TEST_CASE("plan validation") {
    AttackPlan plan;
    plan.setting = PlanSetting::uninformed;
    CHECK_THROWS_AS(validate_plan(plan), Error);

    plan.ffam = cfg_for(AttackDirection::false_familiarity);
    plan.fnov = cfg_for(AttackDirection::false_novelty);
    CHECK_THROWS_AS(validate_plan(plan), Error);  // uninformed with two configs

    plan.setting = PlanSetting::informed;
    CHECK_NOTHROW(validate_plan(plan));

    AttackPlan swapped;
    swapped.setting = PlanSetting::informed;
    swapped.ffam = cfg_for(AttackDirection::false_novelty);  // wrong slot
    CHECK_THROWS_AS(validate_plan(swapped), Error);

    AttackPlan empty_informed;
    empty_informed.setting = PlanSetting::informed;
    CHECK_THROWS_AS(validate_plan(empty_informed), Error);
}

TEST_CASE("report: group stats are ordered and failures surface") {
    Rng rng(3);
    const Network net = random_toy_net(rng, 6, 3);
    std::vector<Sample> samples;
    for (int i = 0; i < 30; ++i) {
        char id[16];
        std::snprintf(id, sizeof(id), "r%03d", i);
        const bool familiar = i % 2 == 0;
        samples.push_back({id, random_tensor({1, 6, 6}, rng),
                           familiar ? std::optional<std::uint32_t>(0u) : std::nullopt,
                           familiar ? SetLabel::familiar : SetLabel::novel});
    }
    const Dataset data = Dataset::from_samples(std::move(samples));

    AttackPlan plan;
    plan.setting = PlanSetting::uninformed;
    plan.fnov = cfg_for(AttackDirection::false_novelty, 0.06);

    const auto results = run_plan(net, plan, data, ScoreRule::mls);
    const ExperimentReport report = build_report(results, plan, ScoreRule::mls);

    CHECK(report.auroc_pre >= 0.0);
    CHECK(report.auroc_pre <= 1.0);
    for (int g = 0; g < 3; ++g)
        for (int p = 0; p < 2; ++p) {
            REQUIRE(report.stats[g][p].has_value());
            const GroupStats& st = *report.stats[g][p];
            CHECK(st.q25 <= st.median);
            CHECK(st.median <= st.q75);
            CHECK(st.p1 <= st.q25);
            CHECK(st.q75 <= st.p99);
        }
    CHECK(report.failed_sample_ids.empty());
    CHECK(report.ars_mls_pearson.has_value());
    CHECK(report.config_echo_json.find("fnov") != std::string::npos);

    const std::string json = summary_json(report);
    CHECK(json.find("\"auroc_pre\"") != std::string::npos);
    CHECK(json.find("\"group_stats\"") != std::string::npos);
    CHECK(json.find("\"config_echo\"") != std::string::npos);
}

TEST_CASE("ars helpers: orientation and grouping") {
    std::vector<ScoredSample> samples;
    auto add = [&](const char* id, SetLabel label, double pre, double post) {
        ScoredSample s;
        s.sample_id = id;
        s.set_label = label;
        s.score_pre = pre;
        s.score_post = post;
        s.attacked = true;
        s.applied = AppliedAttack{AttackMethod::fgsm, Objective::two_norm,
                                  AttackDirection::false_novelty, 0.05};
        samples.push_back(std::move(s));
    };
    // FNov: familiar scores drop hard, novel barely move.
    add("f0", SetLabel::familiar, 5.0, 1.0);   // ars -4
    add("f1", SetLabel::familiar, 4.0, 0.5);   // ars -3.5
    add("n0", SetLabel::novel, 1.0, 0.6);      // ars -0.4
    add("n1", SetLabel::novel, 0.8, 0.7);      // ars -0.1

    // Reacting strongly to a score-lowering attack marks familiarity.
    CHECK(ars_familiarity_auroc(samples, AttackDirection::false_novelty) == 1.0);
    CHECK(ars_familiarity_auroc(samples, AttackDirection::false_familiarity) == 0.0);

    const auto trend = ars_trend(samples, 1);
    REQUIRE(trend.size() == 4);
    CHECK(trend[0].set_label == SetLabel::familiar);
    CHECK(trend[0].mls == 4.0);  // familiar block sorted by pre score
    CHECK(trend[1].mls == 5.0);
    CHECK(trend[2].set_label == SetLabel::novel);
}

TEST_CASE("score_dataset: clean pass mirrors pre scores") {
    const Network net = small_net();
    const Dataset data = four_sample_set();
    const auto results = score_dataset(net, data, ScoreRule::msp);
    for (const ScoredSample& s : results) {
        CHECK_FALSE(s.attacked);
        CHECK(*s.score_post == s.score_pre);
        CHECK(s.score_pre > 0.0);
        CHECK(s.score_pre <= 1.0);
    }
}
