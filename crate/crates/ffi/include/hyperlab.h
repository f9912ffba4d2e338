#ifndef HYPERLAB_H
#define HYPERLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HlStatus {
  HL_STATUS_OK = 0,
  HL_STATUS_NULL_POINTER = 1,
  HL_STATUS_INVALID_UTF8 = 2,
  HL_STATUS_INVALID_ARGUMENT = 3,
  HL_STATUS_INVALID_SPEC = 4,
  HL_STATUS_NUMERIC = 5,
  HL_STATUS_UNSUPPORTED = 6,
  HL_STATUS_PANIC = 7,
} HlStatus;

/**
 * A model instantiated from its spec.
 */
typedef struct HlModel HlModel;

/**
 * A finished verification report.
 */
typedef struct HlReport HlReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the
 * next call into the library from this thread.
 */
const char *hl_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *hl_version(void);

/**
 * Builds a catalog model by name. `params_json` may be null or a JSON
 * object of numeric overrides such as `{"r": 0.8, "c": 1}`.
 *
 * # Safety
 * `name` must be a NUL-terminated string, `params_json` null or
 * NUL-terminated, and `out` a valid pointer.
 */
enum HlStatus hl_model_from_name(const char *name, const char *params_json, struct HlModel **out);

/**
 * Builds a model from a JSON record with a `kind` field.
 *
 * # Safety
 * `spec_json` must be NUL-terminated and `out` a valid pointer.
 */
enum HlStatus hl_model_from_json(const char *spec_json, struct HlModel **out);

/**
 * Hypersurface dimension of a model, or 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t hl_model_dim(const struct HlModel *model);

/**
 * Writes the model id (e.g. `torus(R=2,r=1)`) to `out`.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum HlStatus hl_model_id(const struct HlModel *model, char **out);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void hl_model_free(struct HlModel *model);

/**
 * Runs the verification suite on `grid_len` per-axis resolutions (one
 * value broadcasts). `config_json` may be null or an object with optional
 * `jet_order`, `checks` (array of names) and `tolerances`.
 *
 * # Safety
 * `model` must be a live handle, `grid` must point to `grid_len` values,
 * `config_json` null or NUL-terminated, and `out` a valid pointer.
 */
enum HlStatus hl_verify(const struct HlModel *model,
                        const size_t *grid,
                        size_t grid_len,
                        const char *config_json,
                        struct HlReport **out);

/**
 * 1 when no check failed or errored, 0 otherwise (also for null).
 *
 * # Safety
 * `report` must be null or a live handle.
 */
int hl_report_passed(const struct HlReport *report);

/**
 * Number of check rows.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
size_t hl_report_len(const struct HlReport *report);

/**
 * Writes the report as JSON to `out`.
 *
 * # Safety
 * `report` must be a live handle and `out` a valid pointer.
 */
enum HlStatus hl_report_to_json(const struct HlReport *report, char **out);

/**
 * # Safety
 * `report` must be null or a handle not yet freed.
 */
void hl_report_free(struct HlReport *report);

/**
 * Product-sphere scan as a JSON array of rows.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum HlStatus hl_scan_products_json(size_t m,
                                    size_t m1,
                                    double r1_min,
                                    double r1_max,
                                    double step,
                                    char **out);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void hl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYPERLAB_H */
