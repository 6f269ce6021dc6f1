#ifndef BORB_H
#define BORB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of every fallible call.
 */
typedef enum BorbStatus {
  BORB_STATUS_OK = 0,
  BORB_STATUS_NULL_POINTER = 1,
  BORB_STATUS_INVALID_ARGUMENT = 2,
  BORB_STATUS_CONFIG = 3,
  BORB_STATUS_DOMAIN = 4,
  BORB_STATUS_NON_FINITE = 5,
  BORB_STATUS_ILL_CONDITIONED = 6,
  BORB_STATUS_ROOT_FINDER = 7,
  BORB_STATUS_UNSUPPORTED = 8,
  BORB_STATUS_IO = 9,
  BORB_STATUS_BUFFER_TOO_SMALL = 10,
  BORB_STATUS_INTERNAL = 11,
} BorbStatus;

/**
 * Model families of the catalog.
 */
typedef enum BorbModelKind {
  BORB_MODEL_KIND_FS_SPHERE = 0,
  BORB_MODEL_KIND_FOOTBALL = 1,
  BORB_MODEL_KIND_CIRCLE_MASS = 2,
  BORB_MODEL_KIND_FLAT_CAP = 3,
} BorbModelKind;

/**
 * Opaque model handle.
 */
typedef struct BorbModel BorbModel;

/**
 * Opaque section space handle.
 */
typedef struct BorbSpace BorbSpace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread. The pointer stays valid
 * until the next failing call on the same thread.
 */
const char *borb_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *borb_version(void);

/**
 * Builds a catalog model. `m` is the cone order (FOOTBALL only), `c` the
 * cap level (FLAT_CAP only), `bundle_degree` the line bundle degree.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum BorbStatus borb_model_new(enum BorbModelKind kind,
                               uint32_t m,
                               double c,
                               uint32_t bundle_degree,
                               bool twist_canonical,
                               struct BorbModel **out);

/**
 * Releases a model handle. Null is ignored.
 *
 * # Safety
 * `model` must come from `borb_model_new` and not be freed twice.
 */
void borb_model_free(struct BorbModel *model);

/**
 * Total curvature mass of the model weight within radius `r`.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum BorbStatus borb_model_curvature_mass_within(const struct BorbModel *model,
                                                 double r,
                                                 double *out);

/**
 * Builds the orthonormalized space of invariant sections at level `p`,
 * with the twist taken from the model. Node counts of 0 select defaults.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum BorbStatus borb_space_new(const struct BorbModel *model,
                               uint32_t p,
                               size_t radial_nodes,
                               size_t angular_nodes,
                               struct BorbSpace **out);

/**
 * Releases a space handle. Null is ignored.
 *
 * # Safety
 * `space` must come from `borb_space_new` and not be freed twice.
 */
void borb_space_free(struct BorbSpace *space);

/**
 * Dimension of the section space, or 0 for a null handle.
 *
 * # Safety
 * `space` must be null or a live handle.
 */
size_t borb_space_dimension(const struct BorbSpace *space);

/**
 * Number of zeros of a nonzero section counted with multiplicity.
 *
 * # Safety
 * `space` must be null or a live handle.
 */
uint32_t borb_space_zero_budget(const struct BorbSpace *space);

/**
 * Pointwise Bergman kernel `sum |s_j|^2 e^{-2 p phi}` at `x + iy`.
 *
 * # Safety
 * `space` must be a live handle and `out` writable.
 */
enum BorbStatus borb_bergman_kernel(const struct BorbSpace *space, double x, double y, double *out);

/**
 * Natural logarithm of the Bergman kernel at `x + iy`.
 *
 * # Safety
 * `space` must be a live handle and `out` writable.
 */
enum BorbStatus borb_log_bergman_kernel(const struct BorbSpace *space,
                                        double x,
                                        double y,
                                        double *out);

/**
 * Fubini-Study potential of the space at `x + iy`.
 *
 * # Safety
 * `space` must be a live handle and `out` writable.
 */
enum BorbStatus borb_fs_potential(const struct BorbSpace *space, double x, double y, double *out);

/**
 * Zeros of the random section number `index` of stream `seed`.
 *
 * Affine roots are written with multiplicity into `re` and `im`, which
 * must hold `capacity` entries. `count` receives the number of affine
 * roots and `at_infinity` the mass at infinity. When `capacity` is too
 * small, `count` still receives the required size.
 *
 * # Safety
 * `space` must be a live handle, `re`/`im` must hold `capacity` doubles
 * (or be null when `capacity` is 0), and `count`/`at_infinity` writable.
 */
enum BorbStatus borb_sample_zeros(const struct BorbSpace *space,
                                  uint64_t seed,
                                  size_t index,
                                  double *re,
                                  double *im,
                                  size_t capacity,
                                  size_t *count,
                                  uint32_t *at_infinity);

/**
 * Runs the experiment configuration at `config_path`. `out_dir`,
 * `cache_dir` may be null to keep the configured values; `seed` of 0
 * keeps the configured seed.
 *
 * # Safety
 * Path arguments must be null or NUL-terminated strings.
 */
enum BorbStatus borb_run_config(const char *config_path,
                                const char *out_dir,
                                const char *cache_dir,
                                uint64_t seed);

/**
 * Checks every file listed in a run manifest. `mismatched` receives the
 * number of missing or altered files.
 *
 * # Safety
 * `manifest_path` must be a NUL-terminated string and `mismatched` writable.
 */
enum BorbStatus borb_verify_manifest(const char *manifest_path, size_t *mismatched);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BORB_H */
