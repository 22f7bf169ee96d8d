/* C interface to the dynamic regression synthesis engine.
 *
 * All entry points return drs_status; DRS_OK means success. On any failure
 * drs_last_error() holds a message for the calling thread until the next
 * call. Handles are opaque and single-threaded; run one experiment per
 * handle.
 */
#ifndef DRS_H
#define DRS_H

#include <stdint.h>

#if defined(_WIN32)
#define DRS_API __declspec(dllexport)
#else
#define DRS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum drs_status {
  DRS_OK = 0,
  DRS_ERR_INVALID_ARGUMENT = 1,
  DRS_ERR_IO = 2,
  DRS_ERR_PARSE = 3,
  DRS_ERR_VALIDATION = 4,
  DRS_ERR_NUMERIC = 5,
  DRS_ERR_INTERNAL = 6
} drs_status;

typedef struct drs_experiment drs_experiment;

DRS_API const char* drs_version(void);

/* Message from the most recent failing call on this thread; "" if none. */
DRS_API const char* drs_last_error(void);

/* Loads a config file and returns a handle in *out (NULL on failure). */
DRS_API drs_status drs_experiment_create(const char* config_path,
                                         drs_experiment** out);
DRS_API void drs_experiment_destroy(drs_experiment* exp);

/* Overrides applied on top of the loaded config, before run. */
DRS_API drs_status drs_experiment_set_seed(drs_experiment* exp, uint64_t seed);
DRS_API drs_status drs_experiment_set_output_dir(drs_experiment* exp,
                                                 const char* out_dir);
DRS_API drs_status drs_experiment_set_threads(drs_experiment* exp,
                                              int threads);
/* Comma-separated model ids; "" restores the full enabled set. */
DRS_API drs_status drs_experiment_select_models(drs_experiment* exp,
                                                const char* csv);
/* Comma-separated horizons, e.g. "1,3". */
DRS_API drs_status drs_experiment_select_horizons(drs_experiment* exp,
                                                  const char* csv);

/* Runs the backtest and writes the report files. If n_files is non-NULL it
 * receives the number of files written. */
DRS_API drs_status drs_experiment_run(drs_experiment* exp, int* n_files);

/* Warnings produced by the last run on this handle. */
DRS_API int drs_experiment_warning_count(const drs_experiment* exp);
DRS_API const char* drs_experiment_warning(const drs_experiment* exp, int i);

/* Writes panel.csv, groups.txt and experiment.ini for a named preset
 * ("smoke", "desk" or "ordering") under out_dir. */
DRS_API drs_status drs_generate_panel(const char* preset, const char* out_dir,
                                      uint64_t seed);

#ifdef __cplusplus
}
#endif

#endif /* DRS_H */
