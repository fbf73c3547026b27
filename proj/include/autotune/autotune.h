#ifndef AUTOTUNE_AUTOTUNE_H
#define AUTOTUNE_AUTOTUNE_H

/* C interface to the autotune engine. All entry points return an error code
 * (ATUNE_OK on success); atune_last_error() describes the most recent
 * failure on the calling thread. Strings returned through char** out
 * parameters are heap-allocated and must be released with
 * atune_string_free(). */

#include <stddef.h>
#include <stdint.h>

#if defined(ATUNE_BUILDING)
#define ATUNE_API __attribute__((visibility("default")))
#else
#define ATUNE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum {
    ATUNE_OK = 0,
    ATUNE_EINVAL = 1,    /* invalid input: bad file, bad flag value, contract violation */
    ATUNE_EIO = 2,       /* filesystem failure */
    ATUNE_EEXHAUSTED = 3,/* every distinct configuration has been used */
    ATUNE_EABORTED = 4,  /* campaign aborted; partial results were flushed */
    ATUNE_EFAIL = 5      /* unexpected internal failure */
};

/* Opaque handles. */
typedef struct atune_space atune_space;
typedef struct atune_campaign atune_campaign;

ATUNE_API const char* atune_version(void);

/* Message for the last failed call on this thread; never NULL. */
ATUNE_API const char* atune_last_error(void);

ATUNE_API void atune_string_free(char* s);

/* ----- parameter spaces ----- */

ATUNE_API int atune_space_from_file(const char* path, atune_space** out);
ATUNE_API int atune_space_from_text(const char* json_text, atune_space** out);
ATUNE_API void atune_space_free(atune_space* space);

ATUNE_API int atune_space_param_count(const atune_space* space, size_t* out);

/* CSV listing (header plus n rows) of seeded samples; inactive parameters
 * print as "nan". */
ATUNE_API int atune_space_sample_csv(const atune_space* space, uint64_t seed, size_t n,
                                     char** out_csv);

/* ----- campaigns ----- */

ATUNE_API int atune_campaign_load(const char* path, atune_campaign** out);
ATUNE_API void atune_campaign_free(atune_campaign* campaign);

/* Flag-style overrides (flag > file > default). */
ATUNE_API int atune_campaign_set_workers(atune_campaign* c, int workers);
ATUNE_API int atune_campaign_set_max_evals(atune_campaign* c, int max_evals);
ATUNE_API int atune_campaign_set_timeout(atune_campaign* c, double seconds);
ATUNE_API int atune_campaign_set_kappa(atune_campaign* c, double kappa);
ATUNE_API int atune_campaign_set_seed(atune_campaign* c, uint64_t seed);
ATUNE_API int atune_campaign_set_direction(atune_campaign* c, const char* direction);
ATUNE_API int atune_campaign_set_penalty(atune_campaign* c, double penalty);
ATUNE_API int atune_campaign_set_wall_clock_budget(atune_campaign* c, double seconds);
ATUNE_API int atune_campaign_set_reproducible_timestamps(atune_campaign* c, int enabled);

/* Run the campaign, writing results.csv and trace.csv under output_dir.
 * On success *report_out holds the final human-readable summary. Returns
 * ATUNE_EABORTED when the campaign aborted after flushing partial
 * results. */
ATUNE_API int atune_campaign_run(atune_campaign* c, const char* output_dir, char** report_out);

/* Render the default configuration and the initial batch without executing
 * anything. */
ATUNE_API int atune_campaign_dry_run(atune_campaign* c, char** preview_out);

/* Summarize an existing results file. baseline_override (may be NULL)
 * replaces the campaign file's baseline objective. Fails with ATUNE_EINVAL
 * when the file holds no records. */
ATUNE_API int atune_campaign_report(atune_campaign* c, const char* results_path,
                                    const double* baseline_override, char** report_out);

/* Export trace.csv (t_sec,objective,status, finish-time order) from an
 * existing results file. */
ATUNE_API int atune_campaign_export_trace(atune_campaign* c, const char* results_path,
                                          const char* trace_path);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* AUTOTUNE_AUTOTUNE_H */
