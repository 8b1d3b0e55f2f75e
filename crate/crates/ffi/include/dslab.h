#ifndef DSLAB_H
#define DSLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Walsh–Paley ordering.
 */
#define DSLAB_SYSTEM_WALSH_PALEY 0

/**
 * Walsh–Kaczmarz ordering.
 */
#define DSLAB_SYSTEM_WALSH_KACZMARZ 1

/**
 * Verdict codes written by [`dslab_report_verdict`].
 */
#define DSLAB_VERDICT_PASS 0

#define DSLAB_VERDICT_FAIL 1

#define DSLAB_VERDICT_INCONCLUSIVE 2

/**
 * Outcome of a call.
 */
typedef enum DslabStatus {
  DSLAB_OK = 0,
  DSLAB_DOMAIN_ERROR = 1,
  DSLAB_RESOLUTION_ERROR = 2,
  DSLAB_DEGENERATE_WEIGHTS = 3,
  DSLAB_MODE_ERROR = 4,
  DSLAB_PARSE_ERROR = 5,
  DSLAB_IO_ERROR = 6,
  DSLAB_NULL_POINTER = 7,
  DSLAB_INVALID_UTF8 = 8,
  DSLAB_BUFFER_TOO_SMALL = 9,
  DSLAB_PANIC = 10,
} DslabStatus;

/**
 * An experiment report.
 */
typedef struct DslabReport DslabReport;

/**
 * A weight sequence.
 */
typedef struct DslabWeights DslabWeights;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Size in bytes, NUL included, of the calling thread's last error message.
 */
size_t dslab_last_error_length(void);

/**
 * Copies the calling thread's last error message into `buf`.
 *
 * # Safety
 * `buf` must be writable for `len` bytes; `needed` may be null.
 */
enum DslabStatus dslab_last_error_message(char *buf, size_t len, size_t *needed);

/**
 * Builds weights from a preset such as `"cesaro:1/2"`.
 *
 * # Safety
 * `preset` must be a NUL-terminated string; `out` must be writable.
 */
enum DslabStatus dslab_weights_new(const char *preset, struct DslabWeights **out);

/**
 * Releases weights. Null is ignored.
 *
 * # Safety
 * `weights` must come from [`dslab_weights_new`] and not be used again.
 */
void dslab_weights_free(struct DslabWeights *weights);

/**
 * `q_k` as a double.
 *
 * # Safety
 * `weights` must be a live handle; `out` must be writable.
 */
enum DslabStatus dslab_weights_q(const struct DslabWeights *weights, size_t k, double *out);

/**
 * `Q_n = q_0 + … + q_{n-1}` as a double.
 *
 * # Safety
 * `weights` must be a live handle; `out` must be writable.
 */
enum DslabStatus dslab_weights_mass(const struct DslabWeights *weights, size_t n, double *out);

/**
 * `Q_n` as an exact rational string `"num/den"`.
 *
 * # Safety
 * `weights` must be a live handle; `buf` writable for `len` bytes;
 * `needed` may be null.
 */
enum DslabStatus dslab_weights_mass_exact(const struct DslabWeights *weights,
                                          size_t n,
                                          char *buf,
                                          size_t len,
                                          size_t *needed);

/**
 * Values `±1` of the `n`-th system function at the `2^resolution` cells.
 *
 * # Safety
 * `out` must be writable for `len` values.
 */
enum DslabStatus dslab_system_values(uint32_t system_code,
                                     uint64_t n,
                                     uint32_t resolution,
                                     int8_t *out,
                                     size_t len);

/**
 * Kernel values in floating point. `kind` is `dirichlet`, `fejer`,
 * `cesaro:α`, `norlund` (needs `weights`) or a mean name; `weights` may
 * be null otherwise.
 *
 * # Safety
 * `kind` must be a NUL-terminated string, `weights` null or a live
 * handle, and `out` writable for `len` values.
 */
enum DslabStatus dslab_kernel_values(const char *kind,
                                     uint64_t n,
                                     uint32_t system_code,
                                     uint32_t resolution,
                                     const struct DslabWeights *weights,
                                     double *out,
                                     size_t len);

/**
 * Runs a `dslab` subcommand, e.g. `{"blowup2", "--p", "2/5"}`.
 *
 * # Safety
 * `argv` must hold `argc` NUL-terminated strings; `out` must be writable.
 */
enum DslabStatus dslab_run(size_t argc, const char *const *argv, struct DslabReport **out);

/**
 * Releases a report. Null is ignored.
 *
 * # Safety
 * `report` must come from [`dslab_run`] and not be used again.
 */
void dslab_report_free(struct DslabReport *report);

/**
 * Writes one of the `DSLAB_VERDICT_*` codes.
 *
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum DslabStatus dslab_report_verdict(const struct DslabReport *report, int32_t *out);

/**
 * The report's CSV table.
 *
 * # Safety
 * `report` must be a live handle; `buf` writable for `len` bytes;
 * `needed` may be null.
 */
enum DslabStatus dslab_report_csv(const struct DslabReport *report,
                                  char *buf,
                                  size_t len,
                                  size_t *needed);

/**
 * The report's JSON summary.
 *
 * # Safety
 * As for [`dslab_report_csv`].
 */
enum DslabStatus dslab_report_json(const struct DslabReport *report,
                                   char *buf,
                                   size_t len,
                                   size_t *needed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DSLAB_H */
