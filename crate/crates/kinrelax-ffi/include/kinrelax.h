#ifndef KINRELAX_H
#define KINRELAX_H

/* Generated by cbindgen from kinrelax-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum KrStatus {
  KR_STATUS_OK = 0,
  KR_STATUS_NUMERICAL_FAILURE = 1,
  KR_STATUS_CONFIG_ERROR = 2,
  KR_STATUS_NULL_ARGUMENT = 3,
  KR_STATUS_PANIC = 4,
} KrStatus;

/**
 * Opaque parsed run configuration.
 */
typedef struct KrConfig KrConfig;

/**
 * Opaque run report: the stdout lines and artifact paths of a finished run.
 */
typedef struct KrReport KrReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last error on this thread; borrowed until the next
 * failing call. NULL when no error has been recorded.
 */
const char *kr_last_error(void);

/**
 * Parse a `key = value` configuration text into a new handle.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum KrStatus kr_config_parse(const char *text, struct KrConfig **out);

/**
 * # Safety
 * `cfg` must be a handle from [`kr_config_parse`], not yet freed.
 */
void kr_config_free(struct KrConfig *cfg);

/**
 * Execute a configured run; on success stores a new report handle.
 *
 * # Safety
 * `cfg` must be a live handle from [`kr_config_parse`]; `out` valid.
 */
enum KrStatus kr_run(const struct KrConfig *cfg, struct KrReport **out);

/**
 * # Safety
 * `rep` must be a handle from [`kr_run`], not yet freed.
 */
void kr_report_free(struct KrReport *rep);

/**
 * Number of summary lines in a report.
 *
 * # Safety
 * `rep` must be a live report handle.
 */
uintptr_t kr_report_line_count(const struct KrReport *rep);

/**
 * Borrowed pointer to summary line `i` (NULL out of range); valid while
 * the report lives.
 *
 * # Safety
 * `rep` must be a live report handle.
 */
const char *kr_report_line(const struct KrReport *rep, uintptr_t i);

/**
 * Number of artifact paths in a report.
 *
 * # Safety
 * `rep` must be a live report handle.
 */
uintptr_t kr_report_artifact_count(const struct KrReport *rep);

/**
 * Borrowed pointer to artifact path `i` (NULL out of range).
 *
 * # Safety
 * `rep` must be a live report handle.
 */
const char *kr_report_artifact(const struct KrReport *rep, uintptr_t i);

/**
 * Critical CFL number of a (time order, flux order, iterations) pairing;
 * NaN for an unsupported pairing.
 */
double kr_critical_cfl(uint32_t time_order, uint32_t spatial_order, uint32_t iterations);

/**
 * The full critical-CFL table as a CSV string; free with
 * [`kr_string_free`]. NULL on failure.
 */
char *kr_stability_table_csv(void);

/**
 * # Safety
 * `s` must come from a kinrelax function that allocates a string, and must
 * not have been freed already.
 */
void kr_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KINRELAX_H */
