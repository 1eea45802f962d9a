/* C interface to the delaydiff library: configuration-driven experiments
 * over diffusion LMS networks with per-link communication delays.
 *
 * All functions return a status code; a human-readable message for the most
 * recent failure on the calling thread is available via delaydiff_last_error.
 * Strings returned through char** outputs are owned by the caller and must
 * be released with delaydiff_string_free.
 */
#ifndef DELAYDIFF_H
#define DELAYDIFF_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DELAYDIFF_API __declspec(dllexport)
#else
#define DELAYDIFF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum delaydiff_status {
  DELAYDIFF_OK = 0,
  DELAYDIFF_ERR_INVALID_ARGUMENT = 1,
  DELAYDIFF_ERR_CONFIG = 2,
  DELAYDIFF_ERR_ALL_TRIALS_DIVERGED = 3,
  DELAYDIFF_ERR_IO = 4,
  DELAYDIFF_ERR_INTERNAL = 5
} delaydiff_status;

/* Opaque experiment handle. */
typedef struct delaydiff_experiment delaydiff_experiment;

DELAYDIFF_API const char* delaydiff_version(void);

/* Message for the last failure on this thread; never NULL. */
DELAYDIFF_API const char* delaydiff_last_error(void);

DELAYDIFF_API delaydiff_status delaydiff_experiment_open(const char* config_path,
                                                         delaydiff_experiment** out);
DELAYDIFF_API delaydiff_status delaydiff_experiment_open_text(const char* config_json,
                                                              delaydiff_experiment** out);
DELAYDIFF_API void delaydiff_experiment_close(delaydiff_experiment* experiment);

/* Overrides applied before any random draw happens. */
DELAYDIFF_API delaydiff_status delaydiff_experiment_set_seed(delaydiff_experiment* experiment,
                                                             uint64_t master_seed);
DELAYDIFF_API delaydiff_status delaydiff_experiment_set_workers(delaydiff_experiment* experiment,
                                                                int workers);
DELAYDIFF_API delaydiff_status delaydiff_experiment_set_output_dir(
    delaydiff_experiment* experiment, const char* dir);

/* Runs every arm (simulation and, where defined, theory) and writes the
 * result bundle: per-arm CSV curves, stability_report.txt, metadata.json. */
DELAYDIFF_API delaydiff_status delaydiff_experiment_run(delaydiff_experiment* experiment);

/* Stability report without running any simulation. */
DELAYDIFF_API delaydiff_status delaydiff_experiment_stability_report(
    delaydiff_experiment* experiment, char** out_text);

DELAYDIFF_API delaydiff_status delaydiff_experiment_arm_count(
    const delaydiff_experiment* experiment, size_t* out_count);
DELAYDIFF_API delaydiff_status delaydiff_experiment_arm_label(
    const delaydiff_experiment* experiment, size_t index, char** out_text);

/* Steady-state comparison table across bundles previously written by
 * delaydiff_experiment_run. */
DELAYDIFF_API delaydiff_status delaydiff_compare_bundles(const char* const* bundle_dirs,
                                                         size_t count, char** out_text);

DELAYDIFF_API void delaydiff_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif /* DELAYDIFF_H */
