#ifndef OPUC_H
#define OPUC_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible call.
typedef enum OpucStatus {
  OPUC_STATUS_OK = 0,
  OPUC_STATUS_NULL_POINTER = 1,
  OPUC_STATUS_INVALID_ARGUMENT = 2,
  OPUC_STATUS_INVALID_SEQUENCE = 3,
  OPUC_STATUS_AMBIGUOUS = 4,
  OPUC_STATUS_NUMERIC = 5,
  OPUC_STATUS_BUFFER_TOO_SMALL = 6,
  OPUC_STATUS_PANIC = 7,
} OpucStatus;

// How a coefficient recovery ended.
typedef enum OpucTermination {
  // `max_n` coefficients were produced.
  OPUC_TERMINATION_NONE = 0,
  // The last coefficient has modulus within the guard of 1.
  OPUC_TERMINATION_UNIT_MODULUS = 1,
  // The current Schur iterate has a pole at 0.
  OPUC_TERMINATION_POLE_AT_ZERO = 2,
} OpucTermination;

// Opaque handle to a validated coefficient sequence.
typedef struct OpucSequence OpucSequence;

// Scalars of a Szego identity check.
typedef struct OpucSzegoSummary {
  double lhs;
  double rhs;
  double rel_error;
  double epsilon;
  double log_integral;
  double pole_factor;
  // Poles counted with multiplicity.
  size_t pole_count;
  size_t quad_points;
  size_t classical_start;
} OpucSzegoSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Builds a sequence from `len` coefficients `re[j] + i im[j]`. Coefficients
// within `guard_unit` of the unit circle are rejected.
//
// # Safety
// `re` and `im` must point to `len` doubles; `out` must be writable.
enum OpucStatus opuc_sequence_new(const double *re,
                                  const double *im,
                                  size_t len,
                                  double guard_unit,
                                  struct OpucSequence **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `seq` must come from `opuc_sequence_new` and not be used afterwards.
void opuc_sequence_free(struct OpucSequence *seq);

// Stored length, or 0 for a null handle.
//
// # Safety
// `seq` must be null or a live handle.
size_t opuc_sequence_len(const struct OpucSequence *seq);

// One plus the last index with `|alpha| > 1`, or 0 for a null handle.
//
// # Safety
// `seq` must be null or a live handle.
size_t opuc_sequence_classical_start(const struct OpucSequence *seq);

// Checks the Szego identity. `quad_tol <= 0` or `max_points == 0` select the
// defaults. The disk guard is the sequence's guard.
//
// # Safety
// `seq` must be a live handle and `out` writable.
enum OpucStatus opuc_szego_verify(const struct OpucSequence *seq,
                                  double quad_tol,
                                  size_t max_points,
                                  struct OpucSzegoSummary *out);

// Poles of `F` in the disk, each repeated by multiplicity. `*count` receives
// the number of poles; when it exceeds `capacity` nothing is written to the
// buffers and `BufferTooSmall` is returned, so a call with capacity 0 sizes
// the buffers.
//
// # Safety
// `re` and `im` must hold `capacity` doubles; `count` must be writable.
enum OpucStatus opuc_poles(const struct OpucSequence *seq,
                           double *re,
                           double *im,
                           size_t capacity,
                           size_t *count);

// `F(z)` from the cleared rational form.
//
// # Safety
// `seq` must be a live handle; outputs writable.
enum OpucStatus opuc_eval_caratheodory(const struct OpucSequence *seq,
                                       double z_re,
                                       double z_im,
                                       double *out_re,
                                       double *out_im);

// `Re F(e^{i theta})` by Khrushchev's formula split at `n >= N`.
//
// # Safety
// `seq` must be a live handle; `out` writable.
enum OpucStatus opuc_re_f_khrushchev(const struct OpucSequence *seq,
                                     size_t n,
                                     double theta,
                                     double *out);

// Moments `c_1 .. c_order` of `Psi_m^* / Phi_m^*` into `re`/`im` (length
// `order`), with the root-test growth rate and `1 / min |pole|`.
//
// # Safety
// `seq` must be a live handle; buffers must hold `order` doubles; the rate
// pointers may be null.
enum OpucStatus opuc_moments(const struct OpucSequence *seq,
                             size_t m,
                             size_t order,
                             double *re,
                             double *im,
                             double *growth_rate,
                             double *predicted_rate);

// Verblunsky coefficients of `F = num / den` (coefficients lowest degree
// first). Up to `capacity` coefficients are written; `*count` receives how
// many were produced and `*termination` how the recursion ended.
//
// # Safety
// Input arrays must hold their stated lengths; output buffers `capacity`
// doubles; `count` and `termination` writable.
enum OpucStatus opuc_recover(const double *num_re,
                             const double *num_im,
                             size_t num_len,
                             const double *den_re,
                             const double *den_im,
                             size_t den_len,
                             size_t max_n,
                             double guard,
                             double *alpha_re,
                             double *alpha_im,
                             size_t capacity,
                             size_t *count,
                             enum OpucTermination *termination);

// Copies this thread's last error message, NUL-terminated and truncated to
// `len` bytes, into `buf`. Returns the untruncated length plus one, so a
// call with `len` 0 sizes the buffer. Empty after a successful call.
//
// # Safety
// `buf` must be null or hold `len` bytes.
size_t opuc_last_error_message(char *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OPUC_H */
