#include "osradv/osradv.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "attacks.hpp"
#include "dataset.hpp"
#include "evaluation.hpp"
#include "io.hpp"
#include "network.hpp"
#include "orchestration.hpp"
#include "report.hpp"
#include "trainer.hpp"

using namespace osradv;

struct osradv_network {
    Network net;
};

struct osradv_dataset {
    Dataset data;
};

struct osradv_run {
    std::vector<ScoredSample> samples;
    AttackPlan plan;
    ScoreRule rule = ScoreRule::mls;
    ExperimentReport report;
};

namespace {

thread_local std::string g_last_error;

osradv_status set_error(ErrorKind kind, const char* what) {
    g_last_error = what;
    switch (kind) {
        case ErrorKind::invalid_argument: return OSRADV_ERR_INVALID_ARGUMENT;
        case ErrorKind::io: return OSRADV_ERR_IO;
        case ErrorKind::numeric: return OSRADV_ERR_NUMERIC;
    }
    return OSRADV_ERR_INVALID_ARGUMENT;
}

template <typename Fn>
osradv_status guarded(Fn&& fn) {
    try {
        fn();
        return OSRADV_OK;
    } catch (const Error& e) {
        return set_error(e.kind(), e.what());
    } catch (const std::exception& e) {
        return set_error(ErrorKind::invalid_argument, e.what());
    } catch (...) {
        return set_error(ErrorKind::invalid_argument, "unknown error");
    }
}

osradv_status require(bool cond, const char* what) {
    if (cond) return OSRADV_OK;
    return set_error(ErrorKind::invalid_argument, what);
}

#define OSRADV_REQUIRE(cond, what)                                  \
    do {                                                            \
        if (!(cond)) return require(false, what);                   \
    } while (0)

Objective to_objective(osradv_objective o) {
    switch (o) {
        case OSRADV_OBJECTIVE_MAX: return Objective::max_logit;
        case OSRADV_OBJECTIVE_2NORM: return Objective::two_norm;
        case OSRADV_OBJECTIVE_LOGMSP: return Objective::log_msp;
        case OSRADV_OBJECTIVE_SUMEXP: return Objective::sum_exp;
    }
    fail_invalid("bad objective enum value");
}

AttackDirection to_direction(osradv_direction d) {
    switch (d) {
        case OSRADV_DIRECTION_FFAM: return AttackDirection::false_familiarity;
        case OSRADV_DIRECTION_FNOV: return AttackDirection::false_novelty;
    }
    fail_invalid("bad direction enum value");
}

AttackMethod to_method(osradv_method m) {
    switch (m) {
        case OSRADV_METHOD_FGSM: return AttackMethod::fgsm;
        case OSRADV_METHOD_BIM: return AttackMethod::bim;
        case OSRADV_METHOD_RPROP: return AttackMethod::rprop;
    }
    fail_invalid("bad method enum value");
}

ScoreRule to_rule(osradv_rule r) {
    switch (r) {
        case OSRADV_RULE_MLS: return ScoreRule::mls;
        case OSRADV_RULE_MSP: return ScoreRule::msp;
    }
    fail_invalid("bad score rule enum value");
}

AttackConfig to_config(const osradv_attack_config& c) {
    AttackConfig cfg;
    cfg.objective = to_objective(c.objective);
    cfg.direction = to_direction(c.direction);
    cfg.method = to_method(c.method);
    cfg.epsilon = c.epsilon;
    cfg.clamp_data_range = c.clamp_data_range != 0;
    cfg.bim.alpha = c.alpha;
    cfg.bim.iters = c.iters > 0 ? c.iters : BimParams{}.iters;
    cfg.rprop.iters = c.iters > 0 ? c.iters : RpropParams{}.iters;
    cfg.rprop.eta_plus = c.eta_plus;
    cfg.rprop.eta_minus = c.eta_minus;
    cfg.rprop.delta0 = c.delta0;
    cfg.rprop.delta_min = c.delta_min;
    cfg.rprop.delta_max = c.delta_max;
    return cfg;
}

AttackPlan to_plan(const osradv_plan& p) {
    AttackPlan plan;
    plan.setting = p.setting == OSRADV_SETTING_INFORMED ? PlanSetting::informed
                                                        : PlanSetting::uninformed;
    if (p.ffam) plan.ffam = to_config(*p.ffam);
    if (p.fnov) plan.fnov = to_config(*p.fnov);
    return plan;
}

}  // namespace

extern "C" {

const char* osradv_version(void) { return "0.1.0"; }

const char* osradv_last_error(void) { return g_last_error.c_str(); }

/* ---- networks ---------------------------------------------------------- */

osradv_status osradv_network_load(const char* path, osradv_network** out) {
    OSRADV_REQUIRE(path && out, "osradv_network_load: NULL argument");
    return guarded([&] { *out = new osradv_network{load_network(path)}; });
}

osradv_status osradv_network_save(const osradv_network* net, const char* path) {
    OSRADV_REQUIRE(net && path, "osradv_network_save: NULL argument");
    return guarded([&] { save_network(net->net, path); });
}

void osradv_network_free(osradv_network* net) { delete net; }

osradv_status osradv_network_num_classes(const osradv_network* net, uint32_t* out) {
    OSRADV_REQUIRE(net && out, "osradv_network_num_classes: NULL argument");
    *out = static_cast<uint32_t>(net->net.num_classes());
    return OSRADV_OK;
}

osradv_status osradv_network_input_size(const osradv_network* net, size_t* out) {
    OSRADV_REQUIRE(net && out, "osradv_network_input_size: NULL argument");
    size_t n = 1;
    for (size_t d : net->net.input_shape()) n *= d;
    *out = n;
    return OSRADV_OK;
}

osradv_status osradv_network_forward(const osradv_network* net, const double* x,
                                     size_t x_len, double* logits, size_t logits_len) {
    OSRADV_REQUIRE(net && x && logits, "osradv_network_forward: NULL argument");
    return guarded([&] {
        Tensor input(net->net.input_shape(),
                     std::vector<double>(x, x + x_len));
        const Tensor out = net->net.forward(input);
        if (logits_len < out.size())
            fail_invalid("logits buffer too small: need " + std::to_string(out.size()));
        std::memcpy(logits, out.data(), out.size() * sizeof(double));
    });
}

/* ---- datasets ---------------------------------------------------------- */

osradv_status osradv_dataset_synthetic(uint32_t familiar_classes, uint32_t novel_classes,
                                       uint32_t per_class, uint32_t image_side,
                                       uint64_t seed, osradv_dataset** train_out,
                                       osradv_dataset** test_out) {
    OSRADV_REQUIRE(train_out || test_out, "osradv_dataset_synthetic: no output requested");
    return guarded([&] {
        SyntheticSpec spec{familiar_classes, novel_classes, per_class, image_side, seed};
        SyntheticSplit split = make_synthetic_osr(spec);
        if (train_out) *train_out = new osradv_dataset{std::move(split.train)};
        if (test_out) *test_out = new osradv_dataset{std::move(split.test)};
    });
}

osradv_status osradv_dataset_load(const char* manifest_path, osradv_dataset** out) {
    OSRADV_REQUIRE(manifest_path && out, "osradv_dataset_load: NULL argument");
    return guarded([&] { *out = new osradv_dataset{load_dataset(manifest_path)}; });
}

osradv_status osradv_dataset_save(const osradv_dataset* ds, const char* dir) {
    OSRADV_REQUIRE(ds && dir, "osradv_dataset_save: NULL argument");
    return guarded([&] { save_dataset(ds->data, dir); });
}

void osradv_dataset_free(osradv_dataset* ds) { delete ds; }

osradv_status osradv_dataset_size(const osradv_dataset* ds, size_t* out) {
    OSRADV_REQUIRE(ds && out, "osradv_dataset_size: NULL argument");
    *out = ds->data.size();
    return OSRADV_OK;
}

osradv_status osradv_dataset_count(const osradv_dataset* ds, osradv_set_label label,
                                   size_t* out) {
    OSRADV_REQUIRE(ds && out, "osradv_dataset_count: NULL argument");
    *out = ds->data.count(label == OSRADV_SET_FAMILIAR ? SetLabel::familiar
                                                       : SetLabel::novel);
    return OSRADV_OK;
}

/* ---- toy training ------------------------------------------------------ */

void osradv_train_config_default(osradv_train_config* cfg) {
    if (!cfg) return;
    const TrainConfig d;
    cfg->epochs = d.epochs;
    cfg->lr = d.lr;
    cfg->seed = d.seed;
    cfg->conv1_channels = d.arch.conv1_channels;
    cfg->conv2_channels = d.arch.conv2_channels;
    cfg->dense_hidden = d.arch.dense_hidden;
}

osradv_status osradv_train_toy_model(const osradv_dataset* train,
                                     const osradv_train_config* cfg,
                                     osradv_network** out, double* train_accuracy_out) {
    OSRADV_REQUIRE(train && cfg && out, "osradv_train_toy_model: NULL argument");
    return guarded([&] {
        TrainConfig tc;
        tc.epochs = cfg->epochs;
        tc.lr = cfg->lr;
        tc.seed = cfg->seed;
        tc.arch = ToyArchConfig{cfg->conv1_channels, cfg->conv2_channels,
                                cfg->dense_hidden};
        TrainOutcome outcome = train_toy_model(train->data, tc);
        if (train_accuracy_out) *train_accuracy_out = outcome.train_accuracy;
        *out = new osradv_network{std::move(outcome.net)};
    });
}

osradv_status osradv_closed_set_accuracy(const osradv_network* net,
                                         const osradv_dataset* ds, double* out) {
    OSRADV_REQUIRE(net && ds && out, "osradv_closed_set_accuracy: NULL argument");
    return guarded([&] { *out = closed_set_accuracy(net->net, ds->data); });
}

/* ---- attacks ----------------------------------------------------------- */

void osradv_attack_config_default(osradv_attack_config* cfg) {
    if (!cfg) return;
    const AttackConfig d;
    cfg->objective = OSRADV_OBJECTIVE_MAX;
    cfg->direction = OSRADV_DIRECTION_FFAM;
    cfg->method = OSRADV_METHOD_FGSM;
    cfg->epsilon = d.epsilon;
    cfg->clamp_data_range = d.clamp_data_range ? 1 : 0;
    cfg->iters = 0; /* method default: 10 for bim, 20 for rprop */
    cfg->alpha = 0.0;
    cfg->eta_plus = d.rprop.eta_plus;
    cfg->eta_minus = d.rprop.eta_minus;
    cfg->delta0 = 0.0;
    cfg->delta_min = d.rprop.delta_min;
    cfg->delta_max = 0.0;
}

osradv_status osradv_attack_one(const osradv_network* net,
                                const osradv_attack_config* cfg, const double* x,
                                size_t x_len, double* x_adv, double* objective_start,
                                double* objective_end) {
    OSRADV_REQUIRE(net && cfg && x && x_adv, "osradv_attack_one: NULL argument");
    return guarded([&] {
        Tensor input(net->net.input_shape(), std::vector<double>(x, x + x_len));
        const AttackResult result = run_attack(net->net, to_config(*cfg), input);
        std::memcpy(x_adv, result.x_adv.data(), result.x_adv.size() * sizeof(double));
        if (objective_start) *objective_start = result.objective_trace.front();
        if (objective_end) *objective_end = result.objective_trace.back();
    });
}

/* ---- experiment runs --------------------------------------------------- */

osradv_status osradv_run_plan(const osradv_network* net, const osradv_plan* plan,
                              const osradv_dataset* data, osradv_rule rule,
                              uint32_t threads, osradv_run** out) {
    OSRADV_REQUIRE(net && plan && data && out, "osradv_run_plan: NULL argument");
    return guarded([&] {
        auto run = std::make_unique<osradv_run>();
        run->plan = to_plan(*plan);
        run->rule = to_rule(rule);
        run->samples = osradv::run_plan(net->net, run->plan, data->data, run->rule,
                                        threads);
        run->report = build_report(run->samples, run->plan, run->rule);
        *out = run.release();
    });
}

osradv_status osradv_evaluate(const osradv_network* net, const osradv_dataset* data,
                              osradv_rule rule, uint32_t threads, osradv_run** out) {
    OSRADV_REQUIRE(net && data && out, "osradv_evaluate: NULL argument");
    return guarded([&] {
        auto run = std::make_unique<osradv_run>();
        run->plan = AttackPlan{PlanSetting::uninformed, std::nullopt, std::nullopt};
        run->rule = to_rule(rule);
        run->samples = score_dataset(net->net, data->data, run->rule, threads);
        run->report = build_report(run->samples, run->plan, run->rule);
        *out = run.release();
    });
}

void osradv_run_free(osradv_run* run) { delete run; }

osradv_status osradv_run_size(const osradv_run* run, size_t* out) {
    OSRADV_REQUIRE(run && out, "osradv_run_size: NULL argument");
    *out = run->samples.size();
    return OSRADV_OK;
}

const char* osradv_run_sample_id(const osradv_run* run, size_t index) {
    if (!run || index >= run->samples.size()) return nullptr;
    return run->samples[index].sample_id.c_str();
}

osradv_status osradv_run_sample(const osradv_run* run, size_t index,
                                osradv_sample_record* out) {
    OSRADV_REQUIRE(run && out, "osradv_run_sample: NULL argument");
    OSRADV_REQUIRE(index < run->samples.size(), "osradv_run_sample: index out of range");
    const ScoredSample& s = run->samples[index];
    out->set_label =
        s.set_label == SetLabel::familiar ? OSRADV_SET_FAMILIAR : OSRADV_SET_NOVEL;
    out->score_pre = s.score_pre;
    out->score_post = s.score_post ? *s.score_post : std::nan("");
    out->ars = s.ars() ? *s.ars() : std::nan("");
    out->argmax_pre = s.argmax_pre;
    out->argmax_post = s.argmax_post ? static_cast<int32_t>(*s.argmax_post) : -1;
    out->attacked = s.attacked ? 1 : 0;
    out->failed = s.failed() ? 1 : 0;
    return OSRADV_OK;
}

osradv_status osradv_run_auroc_pre(const osradv_run* run, double* out) {
    OSRADV_REQUIRE(run && out, "osradv_run_auroc_pre: NULL argument");
    *out = run->report.auroc_pre;
    return OSRADV_OK;
}

osradv_status osradv_run_auroc_post(const osradv_run* run, double* out) {
    OSRADV_REQUIRE(run && out, "osradv_run_auroc_post: NULL argument");
    if (std::isnan(run->report.auroc_post))
        return set_error(ErrorKind::numeric,
                         "post-attack AUROC undefined: failures removed a class");
    *out = run->report.auroc_post;
    return OSRADV_OK;
}

osradv_status osradv_run_failure_count(const osradv_run* run, size_t* out) {
    OSRADV_REQUIRE(run && out, "osradv_run_failure_count: NULL argument");
    *out = run->report.failed_sample_ids.size();
    return OSRADV_OK;
}

osradv_status osradv_run_group_stat(const osradv_run* run, osradv_stat_group group,
                                    osradv_stat_phase phase, osradv_stat_kind kind,
                                    double* out) {
    OSRADV_REQUIRE(run && out, "osradv_run_group_stat: NULL argument");
    const int g = static_cast<int>(group), p = static_cast<int>(phase),
              k = static_cast<int>(kind);
    OSRADV_REQUIRE(g >= 0 && g <= 2 && p >= 0 && p <= 1 && k >= 0 && k <= 4,
                   "osradv_run_group_stat: bad enum value");
    const auto& st = run->report.stats[g][p];
    if (!st)
        return set_error(ErrorKind::invalid_argument,
                         "no scores in the requested group/phase");
    switch (kind) {
        case OSRADV_STAT_MEDIAN: *out = st->median; break;
        case OSRADV_STAT_Q25: *out = st->q25; break;
        case OSRADV_STAT_Q75: *out = st->q75; break;
        case OSRADV_STAT_P1: *out = st->p1; break;
        case OSRADV_STAT_P99: *out = st->p99; break;
    }
    return OSRADV_OK;
}

osradv_status osradv_run_ars_pearson(const osradv_run* run, double* out) {
    OSRADV_REQUIRE(run && out, "osradv_run_ars_pearson: NULL argument");
    if (!run->report.ars_mls_pearson)
        return set_error(ErrorKind::numeric,
                         "ARS/score correlation unavailable (too few attacked samples "
                         "or zero variance)");
    *out = *run->report.ars_mls_pearson;
    return OSRADV_OK;
}

osradv_status osradv_run_ars_auroc(const osradv_run* run, double* out) {
    OSRADV_REQUIRE(run && out, "osradv_run_ars_auroc: NULL argument");
    return guarded([&] {
        if (run->plan.setting != PlanSetting::uninformed ||
            (!run->plan.ffam && !run->plan.fnov))
            fail_invalid("ARS scoring needs an uninformed run (one attack for all "
                         "samples)");
        const AttackConfig& cfg = run->plan.ffam ? *run->plan.ffam : *run->plan.fnov;
        *out = ars_familiarity_auroc(run->samples, cfg.direction);
    });
}

osradv_status osradv_run_write_csv(const osradv_run* run, const char* path) {
    OSRADV_REQUIRE(run && path, "osradv_run_write_csv: NULL argument");
    return guarded([&] { write_samples_csv(run->samples, path); });
}

osradv_status osradv_run_write_summary_text(const osradv_run* run, const char* path) {
    OSRADV_REQUIRE(run && path, "osradv_run_write_summary_text: NULL argument");
    return guarded([&] {
        std::ofstream out(path, std::ios::trunc);
        if (!out) fail_io("cannot open " + std::string(path) + " for writing");
        out << summary_text(run->report);
        if (!out) fail_io("error writing " + std::string(path));
    });
}

osradv_status osradv_run_write_summary_json(const osradv_run* run, const char* path) {
    OSRADV_REQUIRE(run && path, "osradv_run_write_summary_json: NULL argument");
    return guarded([&] {
        std::ofstream out(path, std::ios::trunc);
        if (!out) fail_io("cannot open " + std::string(path) + " for writing");
        out << summary_json(run->report);
        if (!out) fail_io("error writing " + std::string(path));
    });
}

osradv_status osradv_run_write_trend_csv(const osradv_run* run, uint32_t window,
                                         const char* path) {
    OSRADV_REQUIRE(run && path, "osradv_run_write_trend_csv: NULL argument");
    return guarded([&] {
        std::ofstream out(path, std::ios::trunc);
        if (!out) fail_io("cannot open " + std::string(path) + " for writing");
        out << "set_label,mls,ars\n";
        for (const TrendPoint& p : ars_trend(run->samples, window))
            out << set_label_name(p.set_label) << ',' << format_double(p.mls) << ','
                << format_double(p.ars) << '\n';
        if (!out) fail_io("error writing " + std::string(path));
    });
}

/* ---- evaluation helpers ------------------------------------------------ */

osradv_status osradv_auroc(const int32_t* labels, const double* scores, size_t n,
                           double* out) {
    OSRADV_REQUIRE(labels && scores && out, "osradv_auroc: NULL argument");
    return guarded([&] {
        std::vector<std::pair<SetLabel, double>> pairs;
        pairs.reserve(n);
        for (size_t i = 0; i < n; ++i)
            pairs.emplace_back(labels[i] ? SetLabel::familiar : SetLabel::novel,
                               scores[i]);
        *out = auroc(pairs);
    });
}

osradv_status osradv_quantile(const double* xs, size_t n, double q, double* out) {
    OSRADV_REQUIRE(xs && out, "osradv_quantile: NULL argument");
    return guarded([&] { *out = quantile_type7(std::vector<double>(xs, xs + n), q); });
}

osradv_status osradv_pearson(const double* xs, const double* ys, size_t n, double* out) {
    OSRADV_REQUIRE(xs && ys && out, "osradv_pearson: NULL argument");
    return guarded([&] {
        *out = pearson(std::span<const double>(xs, n), std::span<const double>(ys, n));
    });
}

} /* extern "C" */
