#ifndef TCDA_H
#define TCDA_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define TCDA_API __declspec(dllexport)
#else
#define TCDA_API __attribute__((visibility("default")))
#endif

typedef enum tcda_status {
  TCDA_OK = 0,
  TCDA_E_INVALID_ARGUMENT = 1,
  TCDA_E_CONFIG = 2,
  TCDA_E_IO = 3,
  TCDA_E_FORMAT = 4,
  TCDA_E_NUMERIC = 5,
  TCDA_E_RETRY_EXHAUSTED = 6,
  TCDA_E_UNDEFINED = 7,
  TCDA_E_SHAPE = 8,
  TCDA_E_INTERNAL = 99
} tcda_status;

typedef struct tcda_options tcda_options;
typedef struct tcda_tensor tcda_tensor;

TCDA_API const char* tcda_version(void);
// Message of the last failed call on this thread; empty after a success.
TCDA_API const char* tcda_last_error(void);
// Summary printed by the last successful command on this thread.
TCDA_API const char* tcda_last_summary(void);

TCDA_API tcda_options* tcda_options_create(void);
TCDA_API void tcda_options_free(tcda_options* opts);
TCDA_API tcda_status tcda_options_set_seed(tcda_options* opts, uint64_t seed);
// 0 uses every hardware thread.
TCDA_API tcda_status tcda_options_set_jobs(tcda_options* opts, int jobs);
// "table" or "appendix".
TCDA_API tcda_status tcda_options_set_schedule_variant(tcda_options* opts, const char* variant);
TCDA_API tcda_status tcda_options_set_exogenous_path(tcda_options* opts, const char* path);

// Commands take a JSON config document; opts may be NULL. Values set on
// opts take precedence over the config.
TCDA_API tcda_status tcda_generate(const tcda_options* opts, const char* config_json);
TCDA_API tcda_status tcda_evaluate(const tcda_options* opts, const char* config_json);
TCDA_API tcda_status tcda_aggregate(const tcda_options* opts, const char* config_json);
TCDA_API tcda_status tcda_ensemble_train(const tcda_options* opts, const char* config_json);
TCDA_API tcda_status tcda_ensemble_apply(const tcda_options* opts, const char* config_json);
TCDA_API tcda_status tcda_report(const tcda_options* opts, const char* config_json);
// Writes the violation registry as CSV; out_path "-" or NULL means stdout.
TCDA_API tcda_status tcda_registry_dump(const tcda_options* opts, const char* out_path);

// Metric over flattened slots. metric: shd_min_norm, auroc, f1_max, acc_max.
TCDA_API tcda_status tcda_metric(const char* metric, const double* scores, const double* truth, size_t n,
                                 double* out);

TCDA_API tcda_status tcda_tensor_create(uint32_t rank, const uint32_t* dims, const double* values,
                                        tcda_tensor** out);
TCDA_API tcda_status tcda_tensor_read(const char* path, tcda_tensor** out);
TCDA_API tcda_status tcda_tensor_write(const tcda_tensor* t, const char* path);
TCDA_API uint32_t tcda_tensor_rank(const tcda_tensor* t);
TCDA_API const uint32_t* tcda_tensor_dims(const tcda_tensor* t);
TCDA_API const double* tcda_tensor_data(const tcda_tensor* t);
TCDA_API size_t tcda_tensor_size(const tcda_tensor* t);
TCDA_API void tcda_tensor_free(tcda_tensor* t);

#ifdef __cplusplus
}
#endif

#endif
