#ifndef BERGMAN_SPECTRA_H
#define BERGMAN_SPECTRA_H

/* Generated by cbindgen from bergman-spectra-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by fallible entry points.
typedef enum BsStatus {
  // Success.
  BS_OK = 0,
  // A pointer argument was null or an index was out of range.
  BS_ERR_ARGUMENT = 1,
  // Parameters failed validation (bad n/m, partition, symbol family, ...).
  BS_ERR_INVALID = 2,
  // The computation failed (non-convergence, invariance mismatch, ...).
  BS_ERR_COMPUTE = 3,
} BsStatus;

// Opaque isotypic decomposition.
typedef struct BsDecomposition BsDecomposition;

// Opaque dense complex operator matrix (row-major, interleaved re/im).
typedef struct BsMatrix BsMatrix;

// Opaque spectrum table: eigenvalues per isotypic component.
typedef struct BsSpectrum BsSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Returns the message for the most recent failure on this thread. The
// pointer stays valid until the next failing call on the same thread; the
// caller must not free it.
const char *bs_last_error(void);

// Computes the closed-form spectrum of the Toeplitz operator for a catalogue
// symbol invariant under the block group given by `blocks` (pass null/0 for
// the full group U(n)). Returns null on failure; see `bs_last_error`.
//
// # Safety
// `blocks` must point to `num_blocks` readable `size_t`s (or be null);
// `family` must be a NUL-terminated string; `param_names`/`param_values`
// must point to `num_params` readable elements each.
struct BsSpectrum *bs_spectrum_compute(size_t n,
                                       uint32_t m,
                                       const size_t *blocks,
                                       size_t num_blocks,
                                       const char *family,
                                       const char *const *param_names,
                                       const double *param_values,
                                       size_t num_params,
                                       size_t quadrature_order);

// Number of isotypic components (spectrum entries).
//
// # Safety
// `spectrum` must be a live handle from its `*_compute` constructor, or null.
size_t bs_spectrum_len(const struct BsSpectrum *spectrum);

// Number of blocks in the partition (length of each degree vector).
//
// # Safety
// `spectrum` must be a live handle from its `*_compute` constructor, or null.
size_t bs_spectrum_num_blocks(const struct BsSpectrum *spectrum);

// Reads entry `index`: its degree vector (buffer of `bs_spectrum_num_blocks`
// u32s), eigenvalue, and component dimension. Any output pointer may be null
// to skip that field.
//
// # Safety
// `degrees_out` must have room for `bs_spectrum_num_blocks` elements when
// non-null; other pointers must be writable when non-null.
enum BsStatus bs_spectrum_entry(const struct BsSpectrum *spectrum,
                                size_t index,
                                uint32_t *degrees_out,
                                double *eigenvalue_out,
                                size_t *dimension_out);

// Quadrature error estimate attached to the table.
//
// # Safety
// `spectrum` must be a live handle from its `*_compute` constructor, or null.
double bs_spectrum_error_estimate(const struct BsSpectrum *spectrum);

// Releases a spectrum handle. Null is ignored.
//
// # Safety
// `spectrum` must come from `bs_spectrum_compute` and not be freed twice.
void bs_spectrum_free(struct BsSpectrum *spectrum);

// Computes the isotypic decomposition of the space of polynomials of degree
// at most `m` in `n` variables under the block group. Returns null on
// failure.
//
// # Safety
// `blocks` must point to `num_blocks` readable `size_t`s (or be null).
struct BsDecomposition *bs_decomposition_compute(size_t n,
                                                 uint32_t m,
                                                 const size_t *blocks,
                                                 size_t num_blocks);

// Number of isotypic components.
//
// # Safety
// `decomposition` must be a live handle from its `*_compute` constructor, or null.
size_t bs_decomposition_len(const struct BsDecomposition *decomposition);

// Reads component `index`: degree vector and dimension.
//
// # Safety
// `degrees_out`, when non-null, must have room for one u32 per block.
enum BsStatus bs_decomposition_component(const struct BsDecomposition *decomposition,
                                         size_t index,
                                         uint32_t *degrees_out,
                                         size_t *dimension_out);

// Releases a decomposition handle. Null is ignored.
//
// # Safety
// `decomposition` must come from `bs_decomposition_compute` and not be freed
// twice.
void bs_decomposition_free(struct BsDecomposition *decomposition);

// Builds the Toeplitz matrix of a catalogue symbol by Monte Carlo
// (`mc_count > 0`, seeded) or quadrature (`mc_count == 0`, using
// `quadrature_order`). Returns null on failure.
//
// # Safety
// Same pointer contracts as `bs_spectrum_compute`.
struct BsMatrix *bs_matrix_compute(size_t n,
                                   uint32_t m,
                                   const char *family,
                                   const char *const *param_names,
                                   const double *param_values,
                                   size_t num_params,
                                   size_t quadrature_order,
                                   size_t mc_count,
                                   uint64_t mc_seed);

// Matrix dimension (the space dimension C(n+m, n)).
//
// # Safety
// `matrix` must be a live handle from its `*_compute` constructor, or null.
size_t bs_matrix_dim(const struct BsMatrix *matrix);

// Error estimate attached to the matrix.
//
// # Safety
// `matrix` must be a live handle from its `*_compute` constructor, or null.
double bs_matrix_error_estimate(const struct BsMatrix *matrix);

// Copies the row-major entries as interleaved re/im pairs into `out`
// (`2 * dim * dim` doubles).
//
// # Safety
// `out` must have room for `2 * bs_matrix_dim(...)^2` doubles.
enum BsStatus bs_matrix_entries(const struct BsMatrix *matrix, double *out);

// Releases a matrix handle. Null is ignored.
//
// # Safety
// `matrix` must come from `bs_matrix_compute` and not be freed twice.
void bs_matrix_free(struct BsMatrix *matrix);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BERGMAN_SPECTRA_H */
