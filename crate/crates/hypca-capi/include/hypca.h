#ifndef HYPCA_H
#define HYPCA_H

/* Generated by cbindgen from hypca-capi. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes returned by every fallible function.
typedef enum HypcaStatus {
  HYPCA_STATUS_OK = 0,
  HYPCA_STATUS_NULL_ARGUMENT = 1,
  HYPCA_STATUS_INVALID_ARGUMENT = 2,
  HYPCA_STATUS_IO = 3,
  HYPCA_STATUS_NOT_CONVERGED = 4,
  HYPCA_STATUS_INTERNAL = 5,
} HypcaStatus;

// Pivot strategies of the eigensolver.
typedef enum HypcaStrategy {
  HYPCA_STRATEGY_CLASSICAL = 0,
  HYPCA_STRATEGY_CYCLIC = 1,
  HYPCA_STRATEGY_PARALLEL = 2,
} HypcaStrategy;

// Opaque hyperspectral cube handle.
typedef struct HypcaCube HypcaCube;

// Opaque reduction result: eigenpairs plus projected scores.
typedef struct HypcaReduction HypcaReduction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *hypca_version(void);

// Copies the calling thread's last error message into `buf` (truncated to
// `cap` bytes, always NUL-terminated when `cap > 0`) and returns the full
// message length including the NUL. Returns 0 when no error is recorded.
//
// # Safety
// `buf` must point to at least `cap` writable bytes, or be null with
// `cap == 0` to query the required length.
size_t hypca_last_error(char *buf, size_t cap);

// Generates a synthetic cube from the builtin signature library.
// `workers = 0` means "all hardware threads". `snr_db = INFINITY` disables
// noise. On success `*out` owns the new handle.
//
// # Safety
// `out` must be a valid pointer to a cube-handle slot.
enum HypcaStatus hypca_cube_synthetic(size_t width,
                                      size_t height,
                                      size_t bands,
                                      size_t endmembers,
                                      double snr_db,
                                      uint64_t seed,
                                      size_t workers,
                                      struct HypcaCube **out);

// Loads a cube from a header sidecar and raw data file.
//
// # Safety
// `header_path` and `data_path` must be valid NUL-terminated strings and
// `out` a valid handle slot.
enum HypcaStatus hypca_cube_load(const char *header_path,
                                 const char *data_path,
                                 struct HypcaCube **out);

// Writes a cube as a header sidecar plus raw data file.
//
// # Safety
// `cube` must be a live handle; the paths must be valid NUL-terminated
// strings.
enum HypcaStatus hypca_cube_save(const struct HypcaCube *cube,
                                 const char *header_path,
                                 const char *data_path);

// # Safety
// `cube` must be a live handle or null.
size_t hypca_cube_width(const struct HypcaCube *cube);

// # Safety
// `cube` must be a live handle or null.
size_t hypca_cube_height(const struct HypcaCube *cube);

// # Safety
// `cube` must be a live handle or null.
size_t hypca_cube_bands(const struct HypcaCube *cube);

// # Safety
// `cube` must be a live handle or null.
size_t hypca_cube_pixels(const struct HypcaCube *cube);

// Releases a cube handle. Null is a no-op.
//
// # Safety
// `cube` must be a handle returned by this library, not yet freed.
void hypca_cube_free(struct HypcaCube *cube);

// Runs mean-centering, covariance, the Jacobi eigensolver and projection
// of the first `pcs` components. `epsilon_rel <= 0` selects the default
// stop factor; `max_sweeps = 0` the default sweep budget; `workers = 0`
// all hardware threads.
//
// # Safety
// `cube` must be a live handle and `out` a valid handle slot.
enum HypcaStatus hypca_reduce(const struct HypcaCube *cube,
                              size_t pcs,
                              enum HypcaStrategy strategy,
                              double epsilon_rel,
                              size_t max_sweeps,
                              size_t workers,
                              struct HypcaReduction **out);

// Band count of the decomposition (the length of the eigenvalue array).
//
// # Safety
// `red` must be a live handle or null.
size_t hypca_reduction_dim(const struct HypcaReduction *red);

// Number of projected components held by the reduction.
//
// # Safety
// `red` must be a live handle or null.
size_t hypca_reduction_components(const struct HypcaReduction *red);

// Sweeps the eigensolver used.
//
// # Safety
// `red` must be a live handle or null.
size_t hypca_reduction_sweeps(const struct HypcaReduction *red);

// Copies the descending eigenvalues into `buf`; `len` must be at least
// the decomposition dimension.
//
// # Safety
// `red` must be a live handle; `buf` must point to `len` writable doubles.
enum HypcaStatus hypca_reduction_eigenvalues(const struct HypcaReduction *red,
                                             double *buf,
                                             size_t len);

// Copies one component's scores (pixel-major within the component) into
// `buf`; `len` must be at least the pixel count.
//
// # Safety
// `red` must be a live handle; `buf` must point to `len` writable floats.
enum HypcaStatus hypca_reduction_scores(const struct HypcaReduction *red,
                                        size_t component,
                                        float *buf,
                                        size_t len);

// Fraction of total variance captured by the first `pcs` components.
//
// # Safety
// `red` must be a live handle and `out` a valid pointer.
enum HypcaStatus hypca_reduction_explained_variance(const struct HypcaReduction *red,
                                                    size_t pcs,
                                                    double *out);

// Releases a reduction handle. Null is a no-op.
//
// # Safety
// `red` must be a handle returned by this library, not yet freed.
void hypca_reduction_free(struct HypcaReduction *red);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYPCA_H */
