#ifndef HAPTICVLM_H
#define HAPTICVLM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HvStatus {
  HV_STATUS_OK = 0,
  HV_STATUS_NULL_POINTER = 1,
  HV_STATUS_INVALID_ARGUMENT = 2,
  HV_STATUS_DIMENSION_MISMATCH = 3,
  HV_STATUS_DEGENERATE_VECTOR = 4,
  HV_STATUS_NO_MATCH = 5,
  HV_STATUS_IO = 6,
  HV_STATUS_FORMAT = 7,
  HV_STATUS_PARSE = 8,
  HV_STATUS_UNKNOWN_PATTERN = 9,
  HV_STATUS_BUFFER_TOO_SMALL = 10,
  HV_STATUS_PANIC = 11,
} HvStatus;

typedef enum HvThermalMode {
  HV_THERMAL_MODE_IDLE = 0,
  HV_THERMAL_MODE_HOT = 1,
  HV_THERMAL_MODE_COLD = 2,
} HvThermalMode;

typedef struct HvDatabase HvDatabase;

typedef struct HvSamples HvSamples;

typedef struct HvThermal HvThermal;

/**
 * Best match from [`hv_database_match`].
 */
typedef struct HvMatch {
  /**
   * Record index, usable with [`hv_database_name`] and [`hv_database_audio_key`].
   */
  size_t index;
  double similarity;
} HvMatch;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf`.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes; `needed` must be null or writable.
 */
enum HvStatus hv_last_error_message(char *buf, size_t len, size_t *needed);

/**
 * Cosine similarity of two `len`-component vectors.
 *
 * # Safety
 * `a` and `b` must be valid for `len` reads; `out` must be writable.
 */
enum HvStatus hv_cosine_similarity(const double *a, const double *b, size_t len, double *out);

/**
 * Loads a binary or text material database.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum HvStatus hv_database_load(const char *path, struct HvDatabase **out);

/**
 * # Safety
 * `db` must be null or a handle from [`hv_database_load`] not yet freed.
 */
void hv_database_free(struct HvDatabase *db);

/**
 * # Safety
 * `db` must be a live handle.
 */
size_t hv_database_len(const struct HvDatabase *db);

/**
 * # Safety
 * `db` must be a live handle.
 */
size_t hv_database_dimension(const struct HvDatabase *db);

/**
 * Best match for `query`; `HV_STATUS_NO_MATCH` when nothing reaches `threshold`.
 *
 * # Safety
 * `db` must be a live handle, `query` valid for `len` reads, `out` writable.
 */
enum HvStatus hv_database_match(const struct HvDatabase *db,
                                const double *query,
                                size_t len,
                                double threshold,
                                struct HvMatch *out);

/**
 * Material name of record `index`.
 *
 * # Safety
 * `db` must be a live handle; `buf` null or valid for `len` bytes; `needed` null or writable.
 */
enum HvStatus hv_database_name(const struct HvDatabase *db,
                               size_t index,
                               char *buf,
                               size_t len,
                               size_t *needed);

/**
 * Audio key of record `index`.
 *
 * # Safety
 * As for [`hv_database_name`].
 */
enum HvStatus hv_database_audio_key(const struct HvDatabase *db,
                                    size_t index,
                                    char *buf,
                                    size_t len,
                                    size_t *needed);

/**
 * Renders a builtin pattern ("WC", "GT", "WS", "FR", "MW").
 *
 * # Safety
 * `pattern` must be a NUL-terminated string; `out` must be writable.
 */
enum HvStatus hv_synth_render(const char *pattern, uint32_t sample_rate_hz, struct HvSamples **out);

/**
 * # Safety
 * `s` must be a live handle.
 */
size_t hv_samples_len(const struct HvSamples *s);

/**
 * Borrowed pointer to the samples; valid until [`hv_samples_free`].
 *
 * # Safety
 * `s` must be a live handle.
 */
const double *hv_samples_data(const struct HvSamples *s);

/**
 * # Safety
 * `s` must be a live handle.
 */
uint32_t hv_samples_rate(const struct HvSamples *s);

/**
 * Writes the samples as mono 16-bit PCM WAV.
 *
 * # Safety
 * `s` must be a live handle; `path` a NUL-terminated string.
 */
enum HvStatus hv_samples_export_wav(const struct HvSamples *s, const char *path);

/**
 * # Safety
 * `s` must be null or a handle from [`hv_synth_render`] not yet freed.
 */
void hv_samples_free(struct HvSamples *s);

/**
 * Parses a free-text model reply into degrees Celsius.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `celsius` must be writable.
 */
enum HvStatus hv_parse_temperature(const char *text, double *celsius);

/**
 * Upper-tail probability of the F distribution.
 *
 * # Safety
 * `out` must be writable.
 */
enum HvStatus hv_f_survival(double f, double df1, double df2, double *out);

/**
 * Simulated plate with the default device parameters, idle at ambient.
 *
 * # Safety
 * `out` must be writable.
 */
enum HvStatus hv_thermal_new(struct HvThermal **out);

/**
 * Simulated plate with explicit time constants, targets and clamp range.
 *
 * # Safety
 * `out` must be writable.
 */
enum HvStatus hv_thermal_new_with(double tau_drive_s,
                                  double tau_idle_s,
                                  double ambient_c,
                                  double hot_target_c,
                                  double cold_target_c,
                                  double clamp_min_c,
                                  double clamp_max_c,
                                  struct HvThermal **out);

/**
 * # Safety
 * `t` must be a live handle.
 */
enum HvStatus hv_thermal_set_mode(struct HvThermal *t, enum HvThermalMode mode);

/**
 * Advances by `dt_s` seconds and reports the new plate temperature.
 *
 * # Safety
 * `t` must be a live handle; `plate_c` null or writable.
 */
enum HvStatus hv_thermal_step(struct HvThermal *t, double dt_s, double *plate_c);

/**
 * # Safety
 * `t` must be a live handle.
 */
double hv_thermal_temperature(const struct HvThermal *t);

/**
 * # Safety
 * `t` must be null or a handle from `hv_thermal_new*` not yet freed.
 */
void hv_thermal_free(struct HvThermal *t);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HAPTICVLM_H */
