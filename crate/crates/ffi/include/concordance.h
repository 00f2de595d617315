#ifndef CONCORDANCE_H
#define CONCORDANCE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ConcordanceStatus {
  CONCORDANCE_STATUS_OK = 0,
  CONCORDANCE_STATUS_NULL_POINTER = 1,
  CONCORDANCE_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The computation itself failed (overflow, reduction budget, orbit
   * leaving the chart).
   */
  CONCORDANCE_STATUS_COMPUTATION_FAILED = 3,
  CONCORDANCE_STATUS_PANIC = 4,
} ConcordanceStatus;

/**
 * Opaque curve in real projective space.
 */
typedef struct ConcordanceCurve ConcordanceCurve;

/**
 * Opaque Néron–Severi model.
 */
typedef struct ConcordanceModel ConcordanceModel;

typedef struct ConcordanceTorusCertificate {
  /**
   * Reducing matrix, row-major.
   */
  int64_t g[4];
  /**
   * Multiplicities of the three line classes.
   */
  int64_t k[3];
  /**
   * Slopes `(a, b)` of the three lines.
   */
  int64_t slopes[6];
  double mvol_r_lower;
  double vol_c;
  double c;
  bool holds;
} ConcordanceTorusCertificate;

/**
 * `f^{-n}(θ) = k1 θ1 + k2 θ2 (+ p_j)`; `j` is -1 when no parallelogram
 * point is needed.
 */
typedef struct ConcordanceDecomposition {
  int64_t n;
  int64_t k1;
  int64_t k2;
  int64_t j;
} ConcordanceDecomposition;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or an empty string.
 * Valid until the next call into this library from the same thread.
 */
const char *concordance_last_error(void);

/**
 * Create a built-in model (`"triple-quadric"` or `"wehler"`).
 *
 * # Safety
 * `name` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum ConcordanceStatus concordance_model_new(const char *name, struct ConcordanceModel **out);

/**
 * # Safety
 * `model` must come from [`concordance_model_new`] and not be freed twice.
 */
void concordance_model_free(struct ConcordanceModel *model);

/**
 * Rank of the model's lattice, 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t concordance_model_rank(const struct ConcordanceModel *model);

/**
 * Entropy `log λ` of the automorphism given by a word of 1-based
 * involution indices (rightmost applied first); `λ` is written to
 * `out_radius` when it is non-null.
 *
 * # Safety
 * `word` must point to `len` readable values, `out_entropy` must be valid.
 */
enum ConcordanceStatus concordance_model_entropy(const struct ConcordanceModel *model,
                                                 const size_t *word,
                                                 size_t len,
                                                 double *out_entropy,
                                                 double *out_radius);

/**
 * Largest real root of Lehmer's polynomial.
 */
double concordance_lehmer_number(void);

/**
 * `alpha · log λ10` and `alpha · λ10` for `alpha ∈ [0, 1]`.
 *
 * # Safety
 * Both out-pointers must be valid.
 */
enum ConcordanceStatus concordance_lehmer_bound(double alpha,
                                                double *out_bound,
                                                double *out_literal);

/**
 * Hyperbolic isometry of the rank-2 lattice with gram `[[g11, g12], [g12, g22]]`,
 * written row-major to `out_matrix`. `*out_found` is 0 when none exists
 * (square discriminant).
 *
 * # Safety
 * `out_matrix` must hold 4 values; `out_found` must be valid.
 */
enum ConcordanceStatus concordance_rank2_isometry(int64_t g11,
                                                  int64_t g12,
                                                  int64_t g22,
                                                  int64_t *out_matrix,
                                                  int32_t *out_found);

/**
 * Certificate for the ample class `alpha·H + beta·V + gamma·Δ` on
 * `E × E` with `E = C/(Z + iyZ)`.
 *
 * # Safety
 * `out` must be valid.
 */
enum ConcordanceStatus concordance_torus_certify(int64_t alpha,
                                                 int64_t beta,
                                                 int64_t gamma,
                                                 double y,
                                                 struct ConcordanceTorusCertificate *out_cert);

/**
 * Decompose a class of the Wehler model.
 *
 * # Safety
 * `out` must be valid.
 */
enum ConcordanceStatus concordance_wehler_decompose(int64_t x,
                                                    int64_t y,
                                                    struct ConcordanceDecomposition *out_dec);

/**
 * Inverse of [`concordance_wehler_decompose`].
 *
 * # Safety
 * `dec` must be valid and `out_class` must hold 2 values.
 */
enum ConcordanceStatus concordance_wehler_compose(const struct ConcordanceDecomposition *dec,
                                                  int64_t *out_class);

/**
 * Arc-length growth rate of `f^t` and the resulting concordance upper
 * bound. `*out_truncated` is set when the point budget ran out.
 *
 * # Safety
 * All out-pointers must be valid.
 */
enum ConcordanceStatus concordance_vieta_entropy(double t,
                                                 size_t n_max,
                                                 double eps,
                                                 size_t budget,
                                                 double *out_h,
                                                 double *out_alpha_upper,
                                                 bool *out_truncated);

/**
 * Curve through `n_points` homogeneous points of length `stride = d + 1`,
 * stored consecutively. `degree_hint` 0 means none.
 *
 * # Safety
 * `coords` must point to `n_points * stride` readable values.
 */
enum ConcordanceStatus concordance_curve_new(const double *coords,
                                             size_t n_points,
                                             size_t stride,
                                             bool closed,
                                             uint32_t degree_hint,
                                             struct ConcordanceCurve **out_curve);

/**
 * Built-in curve in `P^d`: 0 line, 1 unit-circle conic, 2 two lines.
 *
 * # Safety
 * `out_curve` must be valid.
 */
enum ConcordanceStatus concordance_curve_builtin(uint32_t kind,
                                                 size_t d,
                                                 size_t points,
                                                 struct ConcordanceCurve **out_curve);

/**
 * # Safety
 * `curve` must come from this library and not be freed twice.
 */
void concordance_curve_free(struct ConcordanceCurve *curve);

/**
 * Fubini–Study length (a line has length π).
 *
 * # Safety
 * `curve` must be live and `out_length` valid.
 */
enum ConcordanceStatus concordance_curve_fs_length(const struct ConcordanceCurve *curve,
                                                   double *out_length);

/**
 * Monte Carlo Crofton length with its standard error; deterministic in
 * `(seed, samples)`.
 *
 * # Safety
 * `curve` must be live and the out-pointers valid.
 */
enum ConcordanceStatus concordance_crofton_length(const struct ConcordanceCurve *curve,
                                                  size_t samples,
                                                  uint64_t seed,
                                                  double *out_estimate,
                                                  double *out_stderr);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CONCORDANCE_H */
