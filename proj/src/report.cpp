#include "report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

namespace osradv {

using ordered_json = nlohmann::ordered_json;

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

ordered_json config_to_json(const AttackConfig& raw) {
    const AttackConfig cfg = resolve_config(raw);
    ordered_json j;
    j["method"] = attack_method_name(cfg.method);
    j["objective"] = objective_name(cfg.objective);
    j["direction"] = attack_direction_name(cfg.direction);
    j["eps"] = cfg.epsilon;
    j["clamp_data_range"] = cfg.clamp_data_range;
    if (cfg.method == AttackMethod::bim) {
        j["alpha"] = cfg.bim.alpha;
        j["iters"] = cfg.bim.iters;
    } else if (cfg.method == AttackMethod::rprop) {
        j["iters"] = cfg.rprop.iters;
        j["eta_plus"] = cfg.rprop.eta_plus;
        j["eta_minus"] = cfg.rprop.eta_minus;
        j["delta0"] = cfg.rprop.delta0;
        j["delta_min"] = cfg.rprop.delta_min;
        j["delta_max"] = cfg.rprop.delta_max;
    }
    return j;
}

std::optional<GroupStats> stats_of(const std::vector<double>& xs) {
    if (xs.empty()) return std::nullopt;
    GroupStats g;
    g.median = quantile_type7(xs, 0.5);
    g.q25 = quantile_type7(xs, 0.25);
    g.q75 = quantile_type7(xs, 0.75);
    g.p1 = quantile_type7(xs, 0.01);
    g.p99 = quantile_type7(xs, 0.99);
    return g;
}

ordered_json stats_to_json(const std::optional<GroupStats>& g) {
    if (!g) return nullptr;
    ordered_json j;
    j["median"] = g->median;
    j["q25"] = g->q25;
    j["q75"] = g->q75;
    j["p1"] = g->p1;
    j["p99"] = g->p99;
    return j;
}

ordered_json number_or_null(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

const char* group_key(StatGroup g) {
    switch (g) {
        case StatGroup::familiar: return "familiar";
        case StatGroup::novel: return "novel";
        case StatGroup::all: return "all";
    }
    return "?";
}

}  // namespace

std::string plan_to_json(const AttackPlan& plan, ScoreRule rule) {
    ordered_json j;
    j["setting"] = plan_setting_name(plan.setting);
    j["rule"] = rule == ScoreRule::mls ? "mls" : "msp";
    j["ffam"] = plan.ffam ? config_to_json(*plan.ffam) : ordered_json(nullptr);
    j["fnov"] = plan.fnov ? config_to_json(*plan.fnov) : ordered_json(nullptr);
    return j.dump();
}

ExperimentReport build_report(const std::vector<ScoredSample>& samples,
                              const AttackPlan& plan, ScoreRule rule) {
    ExperimentReport report;
    report.config_echo_json = plan_to_json(plan, rule);

    std::vector<std::pair<SetLabel, double>> pre_scores, post_scores;
    std::vector<double> pre_by_group[3], post_by_group[3];
    std::vector<double> ars_values, mls_pre_of_attacked;

    for (const ScoredSample& s : samples) {
        const int g = s.set_label == SetLabel::familiar ? 0 : 1;
        pre_scores.emplace_back(s.set_label, s.score_pre);
        pre_by_group[g].push_back(s.score_pre);
        pre_by_group[2].push_back(s.score_pre);
        if (s.failed()) {
            report.failed_sample_ids.push_back(s.sample_id);
            continue;
        }
        post_scores.emplace_back(s.set_label, *s.score_post);
        post_by_group[g].push_back(*s.score_post);
        post_by_group[2].push_back(*s.score_post);
        if (s.attacked) {
            ars_values.push_back(*s.ars());
            mls_pre_of_attacked.push_back(s.score_pre);
        }
    }

    report.auroc_pre = auroc(pre_scores);
    try {
        report.auroc_post = auroc(post_scores);
    } catch (const Error&) {
        report.auroc_post = std::numeric_limits<double>::quiet_NaN();
    }

    for (int g = 0; g < 3; ++g) {
        report.stats[g][0] = stats_of(pre_by_group[g]);
        report.stats[g][1] = stats_of(post_by_group[g]);
    }

    if (ars_values.size() >= 2) {
        try {
            report.ars_mls_pearson = pearson(mls_pre_of_attacked, ars_values);
        } catch (const Error&) {
            // constant scores; leave unset
        }
    }
    return report;
}

void write_samples_csv(const std::vector<ScoredSample>& samples,
                       const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail_io("cannot open " + path.string() + " for writing");
    out << "sample_id,set_label,score_pre,score_post,argmax_pre,argmax_post,ars,"
           "attacked,method,objective,direction,eps\n";
    for (const ScoredSample& s : samples) {
        out << s.sample_id << ',' << set_label_name(s.set_label) << ','
            << format_double(s.score_pre) << ',';
        if (s.score_post) out << format_double(*s.score_post);
        out << ',' << s.argmax_pre << ',';
        if (s.argmax_post) out << *s.argmax_post;
        out << ',';
        if (auto a = s.ars()) out << format_double(*a);
        out << ',' << (s.attacked ? 1 : 0) << ',';
        if (s.applied) out << attack_method_name(s.applied->method);
        out << ',';
        if (s.applied) out << objective_name(s.applied->objective);
        out << ',';
        if (s.applied) out << attack_direction_name(s.applied->direction);
        out << ',';
        if (s.applied) out << format_double(s.applied->epsilon);
        out << '\n';
    }
    if (!out) fail_io("error writing " + path.string());
}

std::string summary_text(const ExperimentReport& r) {
    std::string s;
    s += "auroc_pre: " + format_double(r.auroc_pre) + "\n";
    s += "auroc_post: " + (std::isnan(r.auroc_post) ? std::string("n/a")
                                                    : format_double(r.auroc_post)) + "\n";
    for (int g = 0; g < 3; ++g) {
        for (int p = 0; p < 2; ++p) {
            const auto& st = r.stats[g][p];
            if (!st) continue;
            const std::string key = std::string(group_key(static_cast<StatGroup>(g))) +
                                    (p == 0 ? "_pre" : "_post");
            s += key + "_median: " + format_double(st->median) + "\n";
            s += key + "_q25: " + format_double(st->q25) + "\n";
            s += key + "_q75: " + format_double(st->q75) + "\n";
            s += key + "_p1: " + format_double(st->p1) + "\n";
            s += key + "_p99: " + format_double(st->p99) + "\n";
        }
    }
    if (r.ars_mls_pearson)
        s += "ars_mls_pearson: " + format_double(*r.ars_mls_pearson) + "\n";
    s += "failures: " + std::to_string(r.failed_sample_ids.size()) + "\n";
    return s;
}

std::string summary_json(const ExperimentReport& r) {
    ordered_json j;
    j["auroc_pre"] = r.auroc_pre;
    j["auroc_post"] = number_or_null(r.auroc_post);
    ordered_json groups;
    for (int g = 0; g < 3; ++g) {
        ordered_json phases;
        phases["pre"] = stats_to_json(r.stats[g][0]);
        phases["post"] = stats_to_json(r.stats[g][1]);
        groups[group_key(static_cast<StatGroup>(g))] = phases;
    }
    j["group_stats"] = groups;
    j["ars_mls_pearson"] =
        r.ars_mls_pearson ? ordered_json(*r.ars_mls_pearson) : ordered_json(nullptr);
    ordered_json failures;
    failures["count"] = r.failed_sample_ids.size();
    failures["sample_ids"] = r.failed_sample_ids;
    j["failures"] = failures;
    j["config_echo"] = ordered_json::parse(r.config_echo_json);
    return j.dump(2) + "\n";
}

double ars_familiarity_auroc(const std::vector<ScoredSample>& samples,
                             AttackDirection direction) {
    const double orient = signed_direction(direction);
    std::vector<std::pair<SetLabel, double>> scores;
    for (const ScoredSample& s : samples) {
        if (!s.attacked || s.failed()) continue;
        scores.emplace_back(s.set_label, orient * *s.ars());
    }
    if (scores.empty()) fail_invalid("no attacked samples to build an ARS score from");
    return auroc(scores);
}

std::vector<TrendPoint> ars_trend(const std::vector<ScoredSample>& samples,
                                  std::size_t window) {
    std::vector<TrendPoint> out;
    for (SetLabel label : {SetLabel::familiar, SetLabel::novel}) {
        std::vector<std::pair<double, double>> points;
        for (const ScoredSample& s : samples) {
            if (s.set_label != label || !s.attacked || s.failed()) continue;
            points.emplace_back(s.score_pre, *s.ars());
        }
        if (points.empty()) continue;
        const std::size_t w = window > 0 ? window : std::max<std::size_t>(1, points.size() / 16);
        for (const auto& [mls, a] : sliding_trend(std::move(points), w))
            out.push_back({label, mls, a});
    }
    return out;
}

}  // namespace osradv
