#ifndef CAMROBUST_H
#define CAMROBUST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum CrStatus {
  CR_STATUS_OK = 0,
  CR_STATUS_NULL_POINTER = 1,
  CR_STATUS_INVALID_ARGUMENT = 2,
  CR_STATUS_DIMENSION_MISMATCH = 3,
  CR_STATUS_IO = 4,
  CR_STATUS_DECODE = 5,
  CR_STATUS_ENCODE = 6,
  CR_STATUS_UNKNOWN_FACTOR = 7,
  CR_STATUS_MISSING_DEPTH = 8,
  CR_STATUS_INVALID_DEPTH = 9,
  CR_STATUS_INVALID_PANOPTIC = 10,
  CR_STATUS_UNDEFINED = 11,
  CR_STATUS_PANIC = 12,
  CR_STATUS_OTHER = 13,
} CrStatus;

typedef enum CrDepthMode {
  CR_DEPTH_MODE_DEPTH = 0,
  CR_DEPTH_MODE_DISPARITY = 1,
} CrDepthMode;

/**
 * Metric depth map in meters.
 */
typedef struct CrDepth CrDepth;

/**
 * Image with interleaved `f64` samples in `[0, 1]`.
 */
typedef struct CrImage CrImage;

/**
 * Panoptic segment-id grid with its segment table.
 */
typedef struct CrPanoptic CrPanoptic;

typedef struct CrSegment {
  uint32_t id;
  uint32_t category_id;
  bool is_crowd;
} CrSegment;

/**
 * PQ, SQ and RQ in `[0, 1]` plus pooled match counts.
 */
typedef struct CrPqScores {
  double pq;
  double sq;
  double rq;
  uint64_t tp;
  uint64_t fp;
  uint64_t fn_;
} CrPqScores;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *cr_last_error(void);

/**
 * Copies `width * height * channels` interleaved samples into a new image.
 *
 * # Safety
 * `data` must point to that many readable `f64`s; `out` must be writable.
 */
enum CrStatus cr_image_new(size_t width,
                           size_t height,
                           size_t channels,
                           const double *data,
                           struct CrImage **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum CrStatus cr_image_load(const char *path, struct CrImage **out);

/**
 * Writes PNG when `jpeg_quality` is 0, else baseline JPEG at that quality.
 *
 * # Safety
 * `image` must be a live handle and `path` a NUL-terminated string.
 */
enum CrStatus cr_image_save(const struct CrImage *image, const char *path, uint8_t jpeg_quality);

/**
 * # Safety
 * `image` must be null or a live handle.
 */
size_t cr_image_width(const struct CrImage *image);

/**
 * # Safety
 * `image` must be null or a live handle.
 */
size_t cr_image_height(const struct CrImage *image);

/**
 * # Safety
 * `image` must be null or a live handle.
 */
size_t cr_image_channels(const struct CrImage *image);

/**
 * Borrowed pointer to the interleaved samples, valid while the handle lives.
 *
 * # Safety
 * `image` must be null or a live handle.
 */
const double *cr_image_data(const struct CrImage *image);

/**
 * # Safety
 * `image` must be null or a handle not yet freed.
 */
void cr_image_free(struct CrImage *image);

/**
 * Depth values in meters, row-major; each must be `> 0` or `+inf`.
 *
 * # Safety
 * `meters` must point to `width * height` readable `f64`s.
 */
enum CrStatus cr_depth_new(size_t width, size_t height, const double *meters, struct CrDepth **out);

/**
 * Loads a 16-bit PNG. A non-positive `baseline_focal` means unset.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum CrStatus cr_depth_load(const char *path,
                            enum CrDepthMode mode,
                            double scale,
                            double baseline_focal,
                            struct CrDepth **out);

/**
 * # Safety
 * `depth` must be null or a handle not yet freed.
 */
void cr_depth_free(struct CrDepth *depth);

/**
 * Applies one catalog factor at severity 1..=3. `depth` may be null for
 * factors that do not need it.
 *
 * # Safety
 * `image` must be a live handle, `depth` null or a live handle, `factor` a
 * NUL-terminated string and `out` writable.
 */
enum CrStatus cr_degrade(const struct CrImage *image,
                         const struct CrDepth *depth,
                         const char *factor,
                         uint8_t severity,
                         uint64_t seed,
                         struct CrImage **out);

/**
 * # Safety
 * Both handles must be live; `out` must be writable.
 */
enum CrStatus cr_psnr(const struct CrImage *reference, const struct CrImage *test, double *out);

/**
 * # Safety
 * Both handles must be live; `out` must be writable.
 */
enum CrStatus cr_ssim(const struct CrImage *reference, const struct CrImage *test, double *out);

/**
 * # Safety
 * Both handles must be live; `out` must be writable.
 */
enum CrStatus cr_cw_ssim(const struct CrImage *reference, const struct CrImage *test, double *out);

/**
 * # Safety
 * Both handles must be live; `out` must be writable.
 */
enum CrStatus cr_fsim(const struct CrImage *reference, const struct CrImage *test, double *out);

/**
 * Builds a panoptic map from a row-major id grid and its segment table.
 *
 * # Safety
 * `ids` must hold `width * height` values and `segments` `n_segments`
 * entries; `out` must be writable.
 */
enum CrStatus cr_panoptic_new(size_t width,
                              size_t height,
                              const uint32_t *ids,
                              const struct CrSegment *segments,
                              size_t n_segments,
                              struct CrPanoptic **out);

/**
 * Loads a panoptic PNG and its per-image segments JSON.
 *
 * # Safety
 * Both paths must be NUL-terminated strings; `out` must be writable.
 */
enum CrStatus cr_panoptic_load(const char *png_path,
                               const char *json_path,
                               struct CrPanoptic **out);

/**
 * # Safety
 * `map` must be null or a handle not yet freed.
 */
void cr_panoptic_free(struct CrPanoptic *map);

/**
 * Panoptic quality of `pred` against `gt`. Scores are averaged over
 * categories, or pooled over all segments when `pooled` is true.
 *
 * # Safety
 * Both handles must be live; `out` must be writable.
 */
enum CrStatus cr_pq(const struct CrPanoptic *pred,
                    const struct CrPanoptic *gt,
                    bool pooled,
                    struct CrPqScores *out);

/**
 * # Safety
 * `x` and `y` must each hold `n` values; `out` must be writable.
 */
enum CrStatus cr_plcc(const double *x, const double *y, size_t n, double *out);

/**
 * # Safety
 * `x` and `y` must each hold `n` values; `out` must be writable.
 */
enum CrStatus cr_srcc(const double *x, const double *y, size_t n, double *out);

/**
 * Meteorological visibility in meters for an attenuation coefficient.
 *
 * # Safety
 * `out` must be writable.
 */
enum CrStatus cr_visibility_from_beta(double beta, double *out);

/**
 * Per-task seed from the global seed, image id, factor name and severity.
 *
 * # Safety
 * `image_id` and `factor` must be NUL-terminated strings.
 */
enum CrStatus cr_derive_seed(uint64_t global_seed,
                             const char *image_id,
                             const char *factor,
                             uint8_t severity,
                             uint64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAMROBUST_H */
