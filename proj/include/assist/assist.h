/* C interface to the assisted-learning library.
 *
 * Every fallible call returns an assist_status; on failure the message is
 * available from assist_last_error() on the calling thread until the next
 * call. Handles are opaque and owned by the caller, who releases them with
 * the matching *_destroy function. Status values double as process exit
 * codes for the command-line tool.
 */
#ifndef ASSIST_ASSIST_H_
#define ASSIST_ASSIST_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ASSIST_API __declspec(dllexport)
#else
#define ASSIST_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum assist_status {
  ASSIST_OK = 0,
  ASSIST_ERR_INVALID_ARGUMENT = 1,
  ASSIST_ERR_CONFIG = 2,
  ASSIST_ERR_DIVERGENCE = 3,
  ASSIST_ERR_VERIFICATION = 4,
  ASSIST_ERR_IO = 5,
  ASSIST_ERR_INTERNAL = 6
} assist_status;

typedef enum assist_model_kind {
  ASSIST_MODEL_QUADRATIC = 0,
  ASSIST_MODEL_LOGISTIC = 1,
  ASSIST_MODEL_MLP = 2
} assist_model_kind;

typedef struct assist_config assist_config;
typedef struct assist_result assist_result;
typedef struct assist_model assist_model;

ASSIST_API const char* assist_last_error(void);
ASSIST_API const char* assist_version(void);

/* ---- Experiment configuration ---- */

ASSIST_API assist_status assist_config_load(const char* path, assist_config** out);
ASSIST_API assist_status assist_config_parse(const char* text, assist_config** out);
/* Overrides one key; unknown keys are rejected with ASSIST_ERR_CONFIG. */
ASSIST_API assist_status assist_config_set(assist_config* config, const char* key,
                                           const char* value);
/* Checks the whole configuration without running anything. */
ASSIST_API assist_status assist_config_validate(const assist_config* config);
ASSIST_API void assist_config_destroy(assist_config* config);

/* Runs the configured experiment. When `experiment` is non-NULL it must be
 * one of "dl", "rl", "theory", "dp" and must agree with the config's
 * `experiment` key if that key is set. A verification failure still
 * produces a result (and its files) but returns ASSIST_ERR_VERIFICATION. */
ASSIST_API assist_status assist_run(const assist_config* config, const char* experiment,
                                    assist_result** out);

/* Renders one SVG per metric from a metrics CSV. `metrics` is a
 * comma-separated column list or NULL for every populated metric. */
ASSIST_API assist_status assist_plot(const char* metrics_csv, const char* out_dir,
                                     const char* metrics, assist_result** out);

ASSIST_API size_t assist_result_file_count(const assist_result* result);
ASSIST_API const char* assist_result_file(const assist_result* result, size_t index);
ASSIST_API const char* assist_result_summary(const assist_result* result);
ASSIST_API void assist_result_destroy(assist_result* result);

/* ---- Model kernel ---- */

ASSIST_API assist_status assist_model_create(assist_model_kind kind, size_t input_dim,
                                             size_t num_classes, const size_t* hidden,
                                             size_t num_hidden, const double* center,
                                             assist_model** out);
ASSIST_API size_t assist_model_param_count(const assist_model* model);
ASSIST_API assist_status assist_model_init(const assist_model* model, uint64_t seed,
                                           double* params, size_t num_params);
/* features is n x input_dim row-major; `sum` selects sum (1) or mean (0)
 * aggregation. */
ASSIST_API assist_status assist_model_loss(const assist_model* model, const double* params,
                                           size_t num_params, const double* features,
                                           const int* labels, size_t n, int sum, double* out);
ASSIST_API assist_status assist_model_gradient(const assist_model* model, const double* params,
                                               size_t num_params, const double* features,
                                               const int* labels, size_t n, int sum,
                                               double* grad_out);
ASSIST_API void assist_model_destroy(assist_model* model);

/* ---- Scalars ---- */

ASSIST_API assist_status assist_theorem_eta(double rounds, double lipschitz, double local_iters,
                                            double grad_bound, double delta0, double* out);
ASSIST_API assist_status assist_theorem_bound(double rounds, double lipschitz,
                                              double local_iters, double grad_bound,
                                              double delta0, double* out);
ASSIST_API assist_status assist_dp_compose(double epsilon, double delta, int64_t steps,
                                           double batch_fraction, double* eps_prime,
                                           double* delta_prime);

#ifdef __cplusplus
}
#endif

#endif /* ASSIST_ASSIST_H_ */
