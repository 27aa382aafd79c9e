/* probeforge C API.
 *
 * All functions returning pf_status leave a message retrievable with
 * pf_last_error() on failure. Strings returned through char** are owned by the
 * caller and released with pf_string_free(). */
#ifndef PROBEFORGE_H
#define PROBEFORGE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PROBEFORGE_BUILDING_LIBRARY)
#    define PF_API __declspec(dllexport)
#  else
#    define PF_API __declspec(dllimport)
#  endif
#else
#  define PF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values double as CLI exit codes. */
typedef enum pf_status {
  PF_OK = 0,
  PF_ERR_INTERNAL = 1,
  PF_ERR_CONFIG = 2,
  PF_ERR_DATA = 3,
  PF_ERR_NUMERIC = 4
} pf_status;

typedef struct pf_config pf_config;
typedef struct pf_dataset pf_dataset;

PF_API const char* pf_version(void);

/* Message of the most recent failure on the calling thread, "" if none. */
PF_API const char* pf_last_error(void);

PF_API void pf_string_free(char* s);

/* Training configuration. Keys: epochs, batch_size, lr, beta1, beta2, eps,
 * seeds (comma-separated list), seed_base, control, layers, graph_mode,
 * layer_index ("" or "last" to unset), graph_seed, jobs, kan_spline_order,
 * kan_grid_intervals, kan_grid_bound, kan_input_scaling, kan_residual. */
PF_API pf_status pf_config_new(pf_config** out);
PF_API void pf_config_free(pf_config* cfg);
PF_API pf_status pf_config_set(pf_config* cfg, const char* key, const char* value);
PF_API pf_status pf_config_validate(const pf_config* cfg);
PF_API pf_status pf_config_to_json(const pf_config* cfg, char** out_json);

PF_API pf_status pf_dataset_load(const char* dir, pf_dataset** out);
PF_API void pf_dataset_free(pf_dataset* ds);
PF_API size_t pf_dataset_num_examples(const pf_dataset* ds);
PF_API uint32_t pf_dataset_num_layers(const pf_dataset* ds);

/* Checks every file of a dataset directory. Data problems are reported in the
 * JSON document and through *out_valid, not as a failing status. */
PF_API pf_status pf_validate(const char* dir, char** out_json, int* out_valid);

/* Results documents. With baseline != 0 the Without control is also run and
 * the difference reported. */
PF_API pf_status pf_run(const pf_config* cfg, const pf_dataset* ds, int baseline, char** out_json);
PF_API pf_status pf_sweep_layers(const pf_config* cfg, const pf_dataset* ds, char** out_json);
PF_API pf_status pf_ablate_random_graph(const pf_config* cfg, const pf_dataset* ds,
                                        char** out_json);
/* bounds: strictly increasing upper bounds, or NULL for the defaults. */
PF_API pf_status pf_bucket_eval(const pf_config* cfg, const pf_dataset* ds, const uint32_t* bounds,
                                size_t n_bounds, char** out_json);

/* Finite-difference gradient suite. *out_passed is set to 1 when every check holds. */
PF_API pf_status pf_gradcheck(uint64_t seed, uint32_t instances, char** out_json, int* out_passed);

typedef struct pf_synth_options {
  const char* task; /* transform, structure or relation */
  uint64_t n_examples;
  uint32_t n_words;
  uint32_t dim;
  uint64_t seed;
  uint32_t n_layers;
  int32_t signal_layer; /* -1 selects the last layer */
  double test_fraction;
  double scale;        /* standard deviation of embedding entries; 0 picks the task default */
  double filler_scale; /* norm factor of transform-task function words */
} pf_synth_options;

PF_API void pf_synth_options_default(pf_synth_options* opts);
PF_API pf_status pf_synth(const pf_synth_options* opts, const char* dir);

#ifdef __cplusplus
}
#endif

#endif /* PROBEFORGE_H */
