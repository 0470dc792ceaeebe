// osradv command-line tool: generate synthetic open-set data, train the toy
// model, run attack experiments, epsilon sweeps, ARS evaluation and clean
// scoring. Talks to the core exclusively through the C API.

#include <osradv/osradv.h>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

struct CliError {
    int code;
    std::string message;
};

[[noreturn]] void fail(int code, const std::string& message) {
    throw CliError{code, message};
}

int exit_code_for(osradv_status status) {
    switch (status) {
        case OSRADV_OK: return kExitOk;
        case OSRADV_ERR_IO: return kExitInput;
        case OSRADV_ERR_NUMERIC: return kExitNumeric;
        case OSRADV_ERR_INVALID_ARGUMENT: return kExitUsage;
    }
    return kExitUsage;
}

void check(osradv_status status) {
    if (status != OSRADV_OK) fail(exit_code_for(status), osradv_last_error());
}

std::string fmt(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// RAII wrappers over the opaque handles.
struct NetworkHandle {
    osradv_network* ptr = nullptr;
    ~NetworkHandle() { osradv_network_free(ptr); }
};

struct DatasetHandle {
    osradv_dataset* ptr = nullptr;
    ~DatasetHandle() { osradv_dataset_free(ptr); }
};

struct RunHandle {
    osradv_run* ptr = nullptr;
    ~RunHandle() { osradv_run_free(ptr); }
};

/* ---- shared option blocks ---------------------------------------------- */

struct CommonOpts {
    std::string weights;
    std::string data;
    std::string out;
    std::string rule = "mls";
    std::uint32_t threads = 0;
    std::uint64_t seed = 1;
};

struct AttackOpts {
    std::string method = "fgsm";
    std::string objective = "max";
    std::string direction = "ffam";
    std::string setting = "uninformed";
    double eps = 0.1;
    int iters = 0;  // 0 picks the method default
    double alpha = 0.0;
    bool no_clamp = false;
    // Per-direction overrides for informed combined runs.
    std::string ffam_objective;
    std::string fnov_objective;
    double ffam_eps = 0.0;
    double fnov_eps = 0.0;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_weights) {
    if (needs_weights)
        cmd->add_option("--weights", o.weights, "weight bundle (OSRW)")->required();
    cmd->add_option("--data", o.data, "dataset manifest")->required();
    cmd->add_option("--out", o.out, "output directory")->required();
    cmd->add_option("--rule", o.rule, "score rule")
        ->check(CLI::IsMember({"mls", "msp"}));
    cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)");
    cmd->add_option("--seed", o.seed, "seed echoed into the run spec");
}

void add_attack(CLI::App* cmd, AttackOpts& o) {
    cmd->add_option("--method", o.method, "attack method")
        ->check(CLI::IsMember({"fgsm", "bim", "rprop"}));
    cmd->add_option("--objective", o.objective, "attack objective")
        ->check(CLI::IsMember({"max", "2norm", "logmsp", "sumexp"}));
    cmd->add_option("--direction", o.direction, "attack direction")
        ->check(CLI::IsMember({"ffam", "fnov", "both"}));
    cmd->add_option("--setting", o.setting, "adversary knowledge")
        ->check(CLI::IsMember({"informed", "uninformed"}));
    cmd->add_option("--eps", o.eps, "L-inf budget in [0,1] pixel units");
    cmd->add_option("--iters", o.iters, "iterations for bim/rprop");
    cmd->add_option("--alpha", o.alpha, "bim step size (default eps/4)");
    cmd->add_flag("--no-clamp", o.no_clamp, "do not clamp adversarial images to [0,1]");
    cmd->add_option("--ffam-objective", o.ffam_objective,
                    "objective override for the ffam config (with --direction both)")
        ->check(CLI::IsMember({"max", "2norm", "logmsp", "sumexp"}));
    cmd->add_option("--fnov-objective", o.fnov_objective,
                    "objective override for the fnov config")
        ->check(CLI::IsMember({"max", "2norm", "logmsp", "sumexp"}));
    cmd->add_option("--ffam-eps", o.ffam_eps, "eps override for the ffam config");
    cmd->add_option("--fnov-eps", o.fnov_eps, "eps override for the fnov config");
}

osradv_objective parse_objective(const std::string& name) {
    if (name == "max") return OSRADV_OBJECTIVE_MAX;
    if (name == "2norm") return OSRADV_OBJECTIVE_2NORM;
    if (name == "logmsp") return OSRADV_OBJECTIVE_LOGMSP;
    if (name == "sumexp") return OSRADV_OBJECTIVE_SUMEXP;
    fail(kExitUsage, "unknown objective '" + name + "'");
}

osradv_method parse_method(const std::string& name) {
    if (name == "fgsm") return OSRADV_METHOD_FGSM;
    if (name == "bim") return OSRADV_METHOD_BIM;
    if (name == "rprop") return OSRADV_METHOD_RPROP;
    fail(kExitUsage, "unknown method '" + name + "'");
}

osradv_rule parse_rule(const std::string& name) {
    return name == "msp" ? OSRADV_RULE_MSP : OSRADV_RULE_MLS;
}

std::uint32_t effective_threads(std::uint32_t flag_value) {
    // The environment variable wins over the flag.
    if (const char* env = std::getenv("OSR_ADV_THREADS")) {
        const std::string s(env);
        std::uint32_t v = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size())
            fail(kExitUsage, "OSR_ADV_THREADS must be an unsigned integer, got '" + s + "'");
        return v;
    }
    return flag_value;
}

osradv_attack_config make_config(const AttackOpts& o, osradv_direction dir,
                                 const std::string& objective, double eps) {
    osradv_attack_config cfg;
    osradv_attack_config_default(&cfg);
    cfg.method = parse_method(o.method);
    cfg.objective = parse_objective(objective);
    cfg.direction = dir;
    cfg.epsilon = eps;
    cfg.clamp_data_range = o.no_clamp ? 0 : 1;
    cfg.iters = o.iters;
    cfg.alpha = o.alpha;
    return cfg;
}

ordered_json config_json(const osradv_attack_config& cfg, const AttackOpts& o,
                         const std::string& objective) {
    ordered_json j;
    j["method"] = o.method;
    j["objective"] = objective;
    j["direction"] = cfg.direction == OSRADV_DIRECTION_FFAM ? "ffam" : "fnov";
    j["eps"] = cfg.epsilon;
    j["clamp_data_range"] = cfg.clamp_data_range != 0;
    if (o.method != "fgsm") j["iters"] = cfg.iters;
    if (o.method == "bim") j["alpha"] = cfg.alpha;
    return j;
}

void ensure_out_dir(const std::string& out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) fail(kExitInput, "cannot create output directory " + out + ": " + ec.message());
}

// Every command leaves a full serialization of its effective parameters.
void write_runspec(const std::string& out, const ordered_json& spec) {
    const fs::path path = fs::path(out) / "runspec.json";
    std::ofstream f(path, std::ios::trunc);
    if (!f) fail(kExitInput, "cannot write " + path.string());
    f << spec.dump(2) << "\n";
}

ordered_json base_runspec(const std::string& subcommand, const CommonOpts& c,
                          std::uint32_t threads) {
    ordered_json spec;
    spec["subcommand"] = subcommand;
    spec["version"] = osradv_version();
    spec["seed"] = c.seed;
    spec["threads"] = threads;
    spec["rule"] = c.rule;
    if (!c.weights.empty()) spec["weights"] = c.weights;
    if (!c.data.empty()) spec["data"] = c.data;
    spec["out"] = c.out;
    return spec;
}

NetworkHandle load_network_checked(const std::string& path) {
    NetworkHandle net;
    check(osradv_network_load(path.c_str(), &net.ptr));
    return net;
}

DatasetHandle load_dataset_checked(const std::string& path) {
    DatasetHandle ds;
    check(osradv_dataset_load(path.c_str(), &ds.ptr));
    return ds;
}

double group_stat(const osradv_run* run, osradv_stat_group g, osradv_stat_phase p,
                  osradv_stat_kind k) {
    double v = 0.0;
    check(osradv_run_group_stat(run, g, p, k, &v));
    return v;
}

void write_run_outputs(const osradv_run* run, const std::string& out) {
    check(osradv_run_write_csv(run, (fs::path(out) / "samples.csv").string().c_str()));
    check(osradv_run_write_summary_text(
        run, (fs::path(out) / "summary.txt").string().c_str()));
    check(osradv_run_write_summary_json(
        run, (fs::path(out) / "summary.json").string().c_str()));
}

void print_run_brief(const osradv_run* run) {
    double pre = 0.0;
    check(osradv_run_auroc_pre(run, &pre));
    std::cout << "auroc_pre: " << fmt(pre) << "\n";
    double post = 0.0;
    if (osradv_run_auroc_post(run, &post) == OSRADV_OK)
        std::cout << "auroc_post: " << fmt(post) << "\n";
    size_t failures = 0;
    check(osradv_run_failure_count(run, &failures));
    if (failures > 0) std::cout << "failures: " << failures << "\n";
}

/* ---- subcommands -------------------------------------------------------- */

struct GenDataOpts {
    std::uint32_t familiar = 5;
    std::uint32_t novel = 5;
    std::uint32_t per_class = 40;
    std::uint32_t side = 8;
    std::uint64_t seed = 1;
    std::string out;
};

int cmd_gen_data(const GenDataOpts& o) {
    ensure_out_dir(o.out);
    DatasetHandle train, test;
    check(osradv_dataset_synthetic(o.familiar, o.novel, o.per_class, o.side, o.seed,
                                   &train.ptr, &test.ptr));
    ensure_out_dir((fs::path(o.out) / "train").string());
    ensure_out_dir((fs::path(o.out) / "test").string());
    check(osradv_dataset_save(train.ptr, (fs::path(o.out) / "train").string().c_str()));
    check(osradv_dataset_save(test.ptr, (fs::path(o.out) / "test").string().c_str()));

    size_t n_train = 0, n_test = 0;
    check(osradv_dataset_size(train.ptr, &n_train));
    check(osradv_dataset_size(test.ptr, &n_test));

    ordered_json spec;
    spec["subcommand"] = "gen-data";
    spec["version"] = osradv_version();
    spec["seed"] = o.seed;
    spec["familiar_classes"] = o.familiar;
    spec["novel_classes"] = o.novel;
    spec["per_class"] = o.per_class;
    spec["image_side"] = o.side;
    spec["out"] = o.out;
    write_runspec(o.out, spec);

    std::cout << "train samples: " << n_train << "\n"
              << "test samples: " << n_test << "\n"
              << "train manifest: " << (fs::path(o.out) / "train/manifest.csv").string()
              << "\n"
              << "test manifest: " << (fs::path(o.out) / "test/manifest.csv").string()
              << "\n";
    return kExitOk;
}

struct TrainOpts {
    CommonOpts common;
    std::uint32_t epochs = 40;
    double lr = 0.05;
    std::uint32_t conv1 = 0, conv2 = 0, dense = 0;
    std::string eval_data;
};

int cmd_train(const TrainOpts& o) {
    ensure_out_dir(o.common.out);
    DatasetHandle train = load_dataset_checked(o.common.data);

    osradv_train_config cfg;
    osradv_train_config_default(&cfg);
    cfg.epochs = o.epochs;
    cfg.lr = o.lr;
    cfg.seed = o.common.seed;
    if (o.conv1) cfg.conv1_channels = o.conv1;
    if (o.conv2) cfg.conv2_channels = o.conv2;
    if (o.dense) cfg.dense_hidden = o.dense;

    NetworkHandle net;
    double train_acc = 0.0;
    check(osradv_train_toy_model(train.ptr, &cfg, &net.ptr, &train_acc));

    const fs::path weights_path = fs::path(o.common.out) / "weights.osrw";
    check(osradv_network_save(net.ptr, weights_path.string().c_str()));
    std::cout << "train_accuracy: " << fmt(train_acc) << "\n";

    std::optional<double> eval_acc;
    if (!o.eval_data.empty()) {
        DatasetHandle eval = load_dataset_checked(o.eval_data);
        double acc = 0.0;
        check(osradv_closed_set_accuracy(net.ptr, eval.ptr, &acc));
        eval_acc = acc;
        std::cout << "closed_set_accuracy: " << fmt(acc) << "\n";
    }

    ordered_json spec = base_runspec("train", o.common, 1);
    spec["epochs"] = o.epochs;
    spec["lr"] = o.lr;
    spec["arch"] = {{"conv1_channels", cfg.conv1_channels},
                    {"conv2_channels", cfg.conv2_channels},
                    {"dense_hidden", cfg.dense_hidden}};
    spec["train_accuracy"] = train_acc;
    if (eval_acc) spec["closed_set_accuracy"] = *eval_acc;
    spec["weights_out"] = weights_path.string();
    write_runspec(o.common.out, spec);
    std::cout << "weights: " << weights_path.string() << "\n";
    return kExitOk;
}

// Builds the plan from the flags. With --direction both (informed only),
// both configs are present and the per-direction overrides apply.
void build_plan(const AttackOpts& a, osradv_attack_config& ffam_cfg,
                osradv_attack_config& fnov_cfg, osradv_plan& plan) {
    const bool both = a.direction == "both";
    plan.setting = a.setting == "informed" ? OSRADV_SETTING_INFORMED
                                           : OSRADV_SETTING_UNINFORMED;
    if (both && plan.setting != OSRADV_SETTING_INFORMED)
        fail(kExitUsage, "--direction both requires --setting informed");

    plan.ffam = nullptr;
    plan.fnov = nullptr;
    if (both || a.direction == "ffam") {
        const std::string obj = a.ffam_objective.empty() ? a.objective : a.ffam_objective;
        const double eps = a.ffam_eps > 0.0 ? a.ffam_eps : a.eps;
        ffam_cfg = make_config(a, OSRADV_DIRECTION_FFAM, obj, eps);
        plan.ffam = &ffam_cfg;
    }
    if (both || a.direction == "fnov") {
        const std::string obj = a.fnov_objective.empty() ? a.objective : a.fnov_objective;
        const double eps = a.fnov_eps > 0.0 ? a.fnov_eps : a.eps;
        fnov_cfg = make_config(a, OSRADV_DIRECTION_FNOV, obj, eps);
        plan.fnov = &fnov_cfg;
    }
}

ordered_json plan_json(const osradv_plan& plan, const AttackOpts& a) {
    ordered_json j;
    j["setting"] = a.setting;
    j["ffam"] = plan.ffam ? config_json(*plan.ffam, a,
                                        a.ffam_objective.empty() ? a.objective
                                                                 : a.ffam_objective)
                          : ordered_json(nullptr);
    j["fnov"] = plan.fnov ? config_json(*plan.fnov, a,
                                        a.fnov_objective.empty() ? a.objective
                                                                 : a.fnov_objective)
                          : ordered_json(nullptr);
    return j;
}

struct AttackCmdOpts {
    CommonOpts common;
    AttackOpts attack;
};

int cmd_attack(const AttackCmdOpts& o) {
    ensure_out_dir(o.common.out);
    NetworkHandle net = load_network_checked(o.common.weights);
    DatasetHandle data = load_dataset_checked(o.common.data);
    const std::uint32_t threads = effective_threads(o.common.threads);

    osradv_attack_config ffam_cfg, fnov_cfg;
    osradv_plan plan;
    build_plan(o.attack, ffam_cfg, fnov_cfg, plan);

    RunHandle run;
    check(osradv_run_plan(net.ptr, &plan, data.ptr, parse_rule(o.common.rule), threads,
                          &run.ptr));
    write_run_outputs(run.ptr, o.common.out);

    ordered_json spec = base_runspec("attack", o.common, threads);
    spec["plan"] = plan_json(plan, o.attack);
    write_runspec(o.common.out, spec);
    print_run_brief(run.ptr);
    return kExitOk;
}

int cmd_evaluate(const CommonOpts& o) {
    ensure_out_dir(o.out);
    NetworkHandle net = load_network_checked(o.weights);
    DatasetHandle data = load_dataset_checked(o.data);
    const std::uint32_t threads = effective_threads(o.threads);

    RunHandle run;
    check(osradv_evaluate(net.ptr, data.ptr, parse_rule(o.rule), threads, &run.ptr));
    write_run_outputs(run.ptr, o.out);

    ordered_json spec = base_runspec("evaluate", o, threads);
    write_runspec(o.out, spec);
    print_run_brief(run.ptr);
    return kExitOk;
}

struct SweepOpts {
    CommonOpts common;
    AttackOpts attack;
    std::string eps_grid;        // comma list; empty picks the default grid
    std::string objectives;      // comma list or "all"
    std::string directions;      // comma list
};

std::vector<double> parse_eps_grid(const std::string& csv) {
    if (csv.empty()) {
        // 17 log-spaced points over [0.005, 0.5].
        std::vector<double> grid;
        for (int i = 0; i < 17; ++i)
            grid.push_back(0.005 * std::pow(100.0, static_cast<double>(i) / 16.0));
        return grid;
    }
    std::vector<double> grid;
    std::size_t start = 0;
    while (start <= csv.size()) {
        const std::size_t comma = csv.find(',', start);
        const std::string item =
            csv.substr(start, comma == std::string::npos ? std::string::npos
                                                         : comma - start);
        if (item.empty()) fail(kExitUsage, "--eps-grid has an empty entry");
        try {
            const double v = std::stod(item);
            if (!(v > 0.0)) throw std::invalid_argument("eps");
            grid.push_back(v);
        } catch (const std::exception&) {
            fail(kExitUsage, "--eps-grid entry '" + item + "' is not a positive number");
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return grid;
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> items;
    std::size_t start = 0;
    while (start <= csv.size()) {
        const std::size_t comma = csv.find(',', start);
        items.push_back(csv.substr(start, comma == std::string::npos ? std::string::npos
                                                                     : comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return items;
}

int cmd_sweep(const SweepOpts& o) {
    ensure_out_dir(o.common.out);
    NetworkHandle net = load_network_checked(o.common.weights);
    DatasetHandle data = load_dataset_checked(o.common.data);
    const std::uint32_t threads = effective_threads(o.common.threads);

    const std::vector<double> grid = parse_eps_grid(o.eps_grid);
    std::vector<std::string> objectives =
        o.objectives == "all" ? std::vector<std::string>{"max", "2norm", "logmsp",
                                                         "sumexp"}
                              : split_list(o.objectives);
    const std::vector<std::string> directions = split_list(o.directions);
    for (const auto& d : directions)
        if (d != "ffam" && d != "fnov")
            fail(kExitUsage, "sweep --direction entries must be ffam or fnov");

    const fs::path csv_path = fs::path(o.common.out) / "sweep.csv";
    std::ofstream csv(csv_path, std::ios::trunc);
    if (!csv) fail(kExitInput, "cannot write " + csv_path.string());
    csv << "objective,direction,eps,auroc_pre,auroc_post,median_pre_familiar,"
           "median_pre_novel,median_post_familiar,median_post_novel,median_post_all,"
           "p1_pre_all,p99_pre_all,failures\n";

    for (const std::string& objective : objectives) {
        for (const std::string& direction : directions) {
            for (double eps : grid) {
                AttackOpts a = o.attack;
                a.objective = objective;
                a.direction = direction;
                a.eps = eps;
                osradv_attack_config ffam_cfg, fnov_cfg;
                osradv_plan plan;
                build_plan(a, ffam_cfg, fnov_cfg, plan);

                RunHandle run;
                check(osradv_run_plan(net.ptr, &plan, data.ptr,
                                      parse_rule(o.common.rule), threads, &run.ptr));

                double auroc_pre = 0.0, auroc_post = std::nan("");
                check(osradv_run_auroc_pre(run.ptr, &auroc_pre));
                (void)osradv_run_auroc_post(run.ptr, &auroc_post);
                size_t failures = 0;
                check(osradv_run_failure_count(run.ptr, &failures));

                csv << objective << ',' << direction << ',' << fmt(eps) << ','
                    << fmt(auroc_pre) << ','
                    << (std::isnan(auroc_post) ? "" : fmt(auroc_post)) << ','
                    << fmt(group_stat(run.ptr, OSRADV_GROUP_FAMILIAR, OSRADV_PHASE_PRE,
                                      OSRADV_STAT_MEDIAN))
                    << ','
                    << fmt(group_stat(run.ptr, OSRADV_GROUP_NOVEL, OSRADV_PHASE_PRE,
                                      OSRADV_STAT_MEDIAN))
                    << ','
                    << fmt(group_stat(run.ptr, OSRADV_GROUP_FAMILIAR, OSRADV_PHASE_POST,
                                      OSRADV_STAT_MEDIAN))
                    << ','
                    << fmt(group_stat(run.ptr, OSRADV_GROUP_NOVEL, OSRADV_PHASE_POST,
                                      OSRADV_STAT_MEDIAN))
                    << ','
                    << fmt(group_stat(run.ptr, OSRADV_GROUP_ALL, OSRADV_PHASE_POST,
                                      OSRADV_STAT_MEDIAN))
                    << ','
                    << fmt(group_stat(run.ptr, OSRADV_GROUP_ALL, OSRADV_PHASE_PRE,
                                      OSRADV_STAT_P1))
                    << ','
                    << fmt(group_stat(run.ptr, OSRADV_GROUP_ALL, OSRADV_PHASE_PRE,
                                      OSRADV_STAT_P99))
                    << ',' << failures << '\n';
            }
        }
    }
    if (!csv) fail(kExitInput, "error writing " + csv_path.string());
    csv.close();

    ordered_json spec = base_runspec("sweep", o.common, threads);
    ordered_json grid_json = ordered_json::array();
    for (double e : grid) grid_json.push_back(e);
    spec["eps_grid"] = grid_json;
    spec["objectives"] = objectives;
    spec["directions"] = directions;
    spec["method"] = o.attack.method;
    spec["setting"] = o.attack.setting;
    spec["iters"] = o.attack.iters;
    spec["alpha"] = o.attack.alpha;
    spec["clamp_data_range"] = !o.attack.no_clamp;
    write_runspec(o.common.out, spec);
    std::cout << "sweep: " << csv_path.string() << "\n";
    return kExitOk;
}

struct ArsOpts {
    CommonOpts common;
    AttackOpts attack;
    std::uint32_t trend_window = 0;
};

int cmd_ars(const ArsOpts& o) {
    ensure_out_dir(o.common.out);
    NetworkHandle net = load_network_checked(o.common.weights);
    DatasetHandle data = load_dataset_checked(o.common.data);
    const std::uint32_t threads = effective_threads(o.common.threads);

    if (o.attack.direction == "both")
        fail(kExitUsage, "ars needs a single attack direction");
    AttackOpts a = o.attack;
    a.setting = "uninformed";  // the ARS attack hits every sample

    osradv_attack_config ffam_cfg, fnov_cfg;
    osradv_plan plan;
    build_plan(a, ffam_cfg, fnov_cfg, plan);

    RunHandle run;
    check(osradv_run_plan(net.ptr, &plan, data.ptr, parse_rule(o.common.rule), threads,
                          &run.ptr));

    write_run_outputs(run.ptr, o.common.out);
    check(osradv_run_write_trend_csv(
        run.ptr, o.trend_window, (fs::path(o.common.out) / "trend.csv").string().c_str()));

    double ars_auroc = std::nan(""), score_auroc = 0.0, rho = std::nan("");
    check(osradv_run_ars_auroc(run.ptr, &ars_auroc));
    check(osradv_run_auroc_pre(run.ptr, &score_auroc));
    (void)osradv_run_ars_pearson(run.ptr, &rho);

    ordered_json ars_json;
    ars_json["rule"] = o.common.rule;
    ars_json["ars_auroc"] = ars_auroc;
    ars_json["score_auroc"] = score_auroc;
    ars_json["pearson_score_ars"] =
        std::isnan(rho) ? ordered_json(nullptr) : ordered_json(rho);
    {
        const fs::path path = fs::path(o.common.out) / "ars.json";
        std::ofstream f(path, std::ios::trunc);
        if (!f) fail(kExitInput, "cannot write " + path.string());
        f << ars_json.dump(2) << "\n";
    }

    ordered_json spec = base_runspec("ars", o.common, threads);
    spec["plan"] = plan_json(plan, a);
    spec["trend_window"] = o.trend_window;
    write_runspec(o.common.out, spec);

    std::cout << "ars_auroc: " << fmt(ars_auroc) << "\n"
              << "score_auroc: " << fmt(score_auroc) << "\n";
    if (!std::isnan(rho)) std::cout << "pearson_score_ars: " << fmt(rho) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adversarial attacks on familiarity-based open-set recognition"};
    app.require_subcommand(1);

    GenDataOpts gen;
    CLI::App* gen_cmd = app.add_subcommand("gen-data", "generate a synthetic open-set "
                                                       "dataset (train + test)");
    gen_cmd->add_option("--familiar", gen.familiar, "familiar (closed-set) classes");
    gen_cmd->add_option("--novel", gen.novel, "novel (open-set) classes");
    gen_cmd->add_option("--per-class", gen.per_class, "samples per familiar class");
    gen_cmd->add_option("--side", gen.side, "square image side length");
    gen_cmd->add_option("--seed", gen.seed, "generator seed");
    gen_cmd->add_option("--out", gen.out, "output directory")->required();

    TrainOpts train;
    CLI::App* train_cmd = app.add_subcommand("train", "train the toy model");
    add_common(train_cmd, train.common, false);
    train_cmd->add_option("--epochs", train.epochs, "training epochs");
    train_cmd->add_option("--lr", train.lr, "SGD learning rate");
    train_cmd->add_option("--conv1", train.conv1, "conv1 channels");
    train_cmd->add_option("--conv2", train.conv2, "conv2 channels");
    train_cmd->add_option("--dense", train.dense, "dense hidden width");
    train_cmd->add_option("--eval-data", train.eval_data,
                          "manifest for closed-set accuracy reporting");

    AttackCmdOpts attack;
    CLI::App* attack_cmd = app.add_subcommand("attack", "run one attack experiment");
    add_common(attack_cmd, attack.common, true);
    add_attack(attack_cmd, attack.attack);

    SweepOpts sweep;
    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "epsilon sweep over objectives and directions");
    add_common(sweep_cmd, sweep.common, true);
    add_attack(sweep_cmd, sweep.attack);
    sweep_cmd->add_option("--eps-grid", sweep.eps_grid,
                          "comma-separated eps values (default: 17 log-spaced in "
                          "[0.005, 0.5])");
    sweep_cmd->add_option("--objectives", sweep.objectives,
                          "comma list of objectives or 'all'")
        ->default_val("all");
    sweep_cmd->add_option("--directions", sweep.directions,
                          "comma list of directions to sweep")
        ->default_val("ffam,fnov");

    ArsOpts ars;
    CLI::App* ars_cmd = app.add_subcommand(
        "ars", "adversarial reaction score evaluation (uninformed attack on all "
               "samples)");
    add_common(ars_cmd, ars.common, true);
    add_attack(ars_cmd, ars.attack);
    ars_cmd->add_option("--trend-window", ars.trend_window,
                        "sliding window size (0 = group size / 16)");
    // Paper-informed defaults for the ARS attack.
    ars.attack.objective = "2norm";
    ars.attack.direction = "fnov";
    ars.attack.eps = 0.051;

    CommonOpts evaluate;
    CLI::App* eval_cmd =
        app.add_subcommand("evaluate", "clean scoring without any attack");
    add_common(eval_cmd, evaluate, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (gen_cmd->parsed()) return cmd_gen_data(gen);
        if (train_cmd->parsed()) return cmd_train(train);
        if (attack_cmd->parsed()) return cmd_attack(attack);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep);
        if (ars_cmd->parsed()) return cmd_ars(ars);
        if (eval_cmd->parsed()) return cmd_evaluate(evaluate);
    } catch (const CliError& e) {
        std::cerr << "error: " << e.message << "\n";
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
