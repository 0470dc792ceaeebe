/* osradv: gradient-based adversarial attacks on familiarity-based open-set
 * recognition scores (MSP/MLS), with attack orchestration, the adversarial
 * reaction score and AUROC evaluation.
 *
 * C89-compatible surface over the C++ core. All functions return an
 * osradv_status; outputs go through pointers. On failure a thread-local
 * message is available via osradv_last_error(). Handles are opaque and
 * must be released with their _free function; handles are safe to use from
 * multiple threads only for concurrent reads.
 */
#ifndef OSRADV_H
#define OSRADV_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define OSRADV_API __declspec(dllexport)
#else
#define OSRADV_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum osradv_status {
    OSRADV_OK = 0,
    OSRADV_ERR_INVALID_ARGUMENT = 1,
    OSRADV_ERR_IO = 2,
    OSRADV_ERR_NUMERIC = 3
} osradv_status;

typedef enum osradv_objective {
    OSRADV_OBJECTIVE_MAX = 0,
    OSRADV_OBJECTIVE_2NORM = 1,
    OSRADV_OBJECTIVE_LOGMSP = 2,
    OSRADV_OBJECTIVE_SUMEXP = 3
} osradv_objective;

typedef enum osradv_direction {
    OSRADV_DIRECTION_FFAM = 0, /* false familiarity: push scores up */
    OSRADV_DIRECTION_FNOV = 1  /* false novelty: push scores down */
} osradv_direction;

typedef enum osradv_method {
    OSRADV_METHOD_FGSM = 0,
    OSRADV_METHOD_BIM = 1,
    OSRADV_METHOD_RPROP = 2
} osradv_method;

typedef enum osradv_rule {
    OSRADV_RULE_MLS = 0,
    OSRADV_RULE_MSP = 1
} osradv_rule;

typedef enum osradv_setting {
    OSRADV_SETTING_INFORMED = 0,
    OSRADV_SETTING_UNINFORMED = 1
} osradv_setting;

typedef enum osradv_set_label {
    OSRADV_SET_FAMILIAR = 0,
    OSRADV_SET_NOVEL = 1
} osradv_set_label;

typedef struct osradv_network osradv_network;
typedef struct osradv_dataset osradv_dataset;
typedef struct osradv_run osradv_run;

/* Library version string, e.g. "0.1.0". */
OSRADV_API const char* osradv_version(void);

/* Message for the calling thread's most recent failure; never NULL. */
OSRADV_API const char* osradv_last_error(void);

/* ---- networks (OSRW weight bundles) ---------------------------------- */

OSRADV_API osradv_status osradv_network_load(const char* path, osradv_network** out);
OSRADV_API osradv_status osradv_network_save(const osradv_network* net, const char* path);
OSRADV_API void osradv_network_free(osradv_network* net);

OSRADV_API osradv_status osradv_network_num_classes(const osradv_network* net,
                                                    uint32_t* out);
/* Total number of input components (product of the input shape). */
OSRADV_API osradv_status osradv_network_input_size(const osradv_network* net,
                                                   size_t* out);

/* Logits for a flat row-major input of exactly input_size components.
 * logits must hold num_classes doubles. */
OSRADV_API osradv_status osradv_network_forward(const osradv_network* net,
                                                const double* x, size_t x_len,
                                                double* logits, size_t logits_len);

/* ---- datasets --------------------------------------------------------- */

/* Synthetic open-set split: familiar classes appear in train and test,
 * novel classes only in test; the test set is balanced. Deterministic in
 * the seed. Either output pointer may be NULL to skip that split. */
OSRADV_API osradv_status osradv_dataset_synthetic(uint32_t familiar_classes,
                                                  uint32_t novel_classes,
                                                  uint32_t per_class,
                                                  uint32_t image_side, uint64_t seed,
                                                  osradv_dataset** train_out,
                                                  osradv_dataset** test_out);

/* Loads a manifest (sample_id,tensor_path,class_label,set_label lines). */
OSRADV_API osradv_status osradv_dataset_load(const char* manifest_path,
                                             osradv_dataset** out);

/* Writes <dir>/manifest.csv and <dir>/tensors/<id>.osrt per sample. */
OSRADV_API osradv_status osradv_dataset_save(const osradv_dataset* ds, const char* dir);

OSRADV_API void osradv_dataset_free(osradv_dataset* ds);

OSRADV_API osradv_status osradv_dataset_size(const osradv_dataset* ds, size_t* out);
OSRADV_API osradv_status osradv_dataset_count(const osradv_dataset* ds,
                                              osradv_set_label label, size_t* out);

/* ---- toy training ----------------------------------------------------- */

typedef struct osradv_train_config {
    uint32_t epochs;
    double lr;
    uint64_t seed;
    uint32_t conv1_channels; /* 0 picks the default */
    uint32_t conv2_channels;
    uint32_t dense_hidden;
} osradv_train_config;

OSRADV_API void osradv_train_config_default(osradv_train_config* cfg);

/* Minimal per-sample SGD with softmax cross-entropy on an all-familiar
 * training set. Deterministic in the seed. train_accuracy_out may be NULL. */
OSRADV_API osradv_status osradv_train_toy_model(const osradv_dataset* train,
                                                const osradv_train_config* cfg,
                                                osradv_network** out,
                                                double* train_accuracy_out);

/* Fraction of labelled familiar samples classified correctly. */
OSRADV_API osradv_status osradv_closed_set_accuracy(const osradv_network* net,
                                                    const osradv_dataset* ds,
                                                    double* out);

/* ---- attacks ----------------------------------------------------------- */

typedef struct osradv_attack_config {
    osradv_objective objective;
    osradv_direction direction;
    osradv_method method;
    double epsilon;       /* L-inf budget in [0,1] pixel units; > 0 */
    int clamp_data_range; /* nonzero keeps adversarial images in [0,1] */
    int iters;            /* bim/rprop iterations */
    double alpha;         /* bim step size; <= 0 picks epsilon/4 */
    double eta_plus;      /* rprop step growth, > 1 */
    double eta_minus;     /* rprop step shrink, in (0,1) */
    double delta0;        /* rprop initial step; <= 0 picks epsilon/10 */
    double delta_min;
    double delta_max;     /* <= 0 picks epsilon */
} osradv_attack_config;

/* FGSM / max / ffam / eps 0.1 / clamp on, with standard bim and rprop
 * parameters (iters 10 and 20, eta 1.2/0.5, delta_min 1e-6). */
OSRADV_API void osradv_attack_config_default(osradv_attack_config* cfg);

/* Attacks a single flat input; x_adv must hold x_len doubles.
 * objective_start/end may be NULL. */
OSRADV_API osradv_status osradv_attack_one(const osradv_network* net,
                                           const osradv_attack_config* cfg,
                                           const double* x, size_t x_len,
                                           double* x_adv, double* objective_start,
                                           double* objective_end);

/* ---- experiment runs --------------------------------------------------- */

/* Uninformed plans take exactly one config; informed plans take at least
 * one (ffam applies to novel samples only, fnov to familiar only). Configs
 * must carry the matching direction. */
typedef struct osradv_plan {
    osradv_setting setting;
    const osradv_attack_config* ffam; /* NULL when absent */
    const osradv_attack_config* fnov;
} osradv_plan;

/* Scores every sample, attacks per the plan, rescores. threads = 0 picks
 * the hardware count; results are identical for any thread count. */
OSRADV_API osradv_status osradv_run_plan(const osradv_network* net,
                                         const osradv_plan* plan,
                                         const osradv_dataset* data, osradv_rule rule,
                                         uint32_t threads, osradv_run** out);

/* Clean scoring pass without any attack; post scores mirror pre scores. */
OSRADV_API osradv_status osradv_evaluate(const osradv_network* net,
                                         const osradv_dataset* data, osradv_rule rule,
                                         uint32_t threads, osradv_run** out);

OSRADV_API void osradv_run_free(osradv_run* run);

OSRADV_API osradv_status osradv_run_size(const osradv_run* run, size_t* out);

typedef struct osradv_sample_record {
    osradv_set_label set_label;
    double score_pre;
    double score_post; /* NaN when the attack failed */
    double ars;        /* score_post - score_pre; NaN when failed */
    uint32_t argmax_pre;
    int32_t argmax_post; /* -1 when the attack failed */
    int attacked;        /* an attack was attempted on this sample */
    int failed;
} osradv_sample_record;

/* Valid until the run is freed. */
OSRADV_API const char* osradv_run_sample_id(const osradv_run* run, size_t index);
OSRADV_API osradv_status osradv_run_sample(const osradv_run* run, size_t index,
                                           osradv_sample_record* out);

OSRADV_API osradv_status osradv_run_auroc_pre(const osradv_run* run, double* out);
/* Fails with OSRADV_ERR_NUMERIC when failures removed one class entirely. */
OSRADV_API osradv_status osradv_run_auroc_post(const osradv_run* run, double* out);
OSRADV_API osradv_status osradv_run_failure_count(const osradv_run* run, size_t* out);

typedef enum osradv_stat_group {
    OSRADV_GROUP_FAMILIAR = 0,
    OSRADV_GROUP_NOVEL = 1,
    OSRADV_GROUP_ALL = 2
} osradv_stat_group;

typedef enum osradv_stat_phase {
    OSRADV_PHASE_PRE = 0,
    OSRADV_PHASE_POST = 1
} osradv_stat_phase;

typedef enum osradv_stat_kind {
    OSRADV_STAT_MEDIAN = 0,
    OSRADV_STAT_Q25 = 1,
    OSRADV_STAT_Q75 = 2,
    OSRADV_STAT_P1 = 3,
    OSRADV_STAT_P99 = 4
} osradv_stat_kind;

OSRADV_API osradv_status osradv_run_group_stat(const osradv_run* run,
                                               osradv_stat_group group,
                                               osradv_stat_phase phase,
                                               osradv_stat_kind kind, double* out);

/* Pearson correlation between the pre-attack score and the ARS over
 * attacked samples. */
OSRADV_API osradv_status osradv_run_ars_pearson(const osradv_run* run, double* out);

/* AUROC of the ARS used as a familiarity score, oriented by the attack
 * direction. Only defined for uninformed runs. */
OSRADV_API osradv_status osradv_run_ars_auroc(const osradv_run* run, double* out);

/* Per-sample CSV with header sample_id,set_label,score_pre,score_post,
 * argmax_pre,argmax_post,ars,attacked,method,objective,direction,eps. */
OSRADV_API osradv_status osradv_run_write_csv(const osradv_run* run, const char* path);
OSRADV_API osradv_status osradv_run_write_summary_text(const osradv_run* run,
                                                       const char* path);
OSRADV_API osradv_status osradv_run_write_summary_json(const osradv_run* run,
                                                       const char* path);
/* set_label,mls,ars rows of the sliding ARS trend per group; window 0
 * picks max(1, group size / 16). */
OSRADV_API osradv_status osradv_run_write_trend_csv(const osradv_run* run,
                                                    uint32_t window, const char* path);

/* ---- evaluation helpers ------------------------------------------------ */

/* labels: nonzero = familiar (positive class). Exact pair-count semantics. */
OSRADV_API osradv_status osradv_auroc(const int32_t* labels, const double* scores,
                                      size_t n, double* out);

/* Type-7 linear-interpolation quantile, q in [0,1]. */
OSRADV_API osradv_status osradv_quantile(const double* xs, size_t n, double q,
                                         double* out);

OSRADV_API osradv_status osradv_pearson(const double* xs, const double* ys, size_t n,
                                        double* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* OSRADV_H */
