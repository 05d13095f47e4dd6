#ifndef ELASTIC_CALDERON_H
#define ELASTIC_CALDERON_H

/* C interface to the elastic Calderon laboratory. All functions are
 * thread-compatible; the error message store is thread-local. Strings
 * returned through char** out-parameters are owned by the caller and must be
 * released with ecl_string_free. */

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ecl_status {
  ECL_OK = 0,
  ECL_VALIDATION_ERROR = 2, /* bad config / precondition violation / IO */
  ECL_NUMERICAL_ERROR = 3   /* failed solve or non-finite result */
} ecl_status;

/* Opaque, fully validated experiment configuration. */
typedef struct ecl_experiment ecl_experiment;

/* Semantic version of the library. Static storage; do not free. */
const char* ecl_version(void);

/* Message of the last failure on this thread (empty string if none).
 * Static storage; do not free. */
const char* ecl_last_error(void);

void ecl_string_free(char* s);

/* Parses and validates a config JSON document. On success *out receives a
 * handle (release with ecl_experiment_free). */
ecl_status ecl_experiment_load(const char* config_json, ecl_experiment** out);
void ecl_experiment_free(ecl_experiment* handle);

/* Lists every violated precondition without computing. Returns ECL_OK with
 * *out_diagnostics = NULL when clean; otherwise ECL_VALIDATION_ERROR with a
 * newline-separated report. */
ecl_status ecl_validate(const char* config_json, char** out_diagnostics);

/* Runs the experiment and writes the bundle under out_dir. threads > 0
 * overrides the config worker-pool size. On success *out_result_json (may be
 * NULL if unwanted) receives the result JSON text. */
ecl_status ecl_experiment_run(const ecl_experiment* handle, const char* out_dir,
                              int threads, char** out_result_json);

/* Pretty-prints an existing run bundle into *out_text. */
ecl_status ecl_show_bundle(const char* run_dir, char** out_text);

#ifdef __cplusplus
}
#endif

#endif /* ELASTIC_CALDERON_H */
