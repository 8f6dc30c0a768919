#ifndef QLSPEC_H
#define QLSPEC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QlsStatus {
  QLS_STATUS_OK = 0,
  QLS_STATUS_IO = 1,
  QLS_STATUS_ARGUMENT = 2,
  QLS_STATUS_SIZE = 3,
  QLS_STATUS_UNSUPPORTED = 4,
  QLS_STATUS_NUMERICAL = 5,
  QLS_STATUS_NULL_POINTER = 6,
  QLS_STATUS_BUFFER_TOO_SMALL = 7,
  QLS_STATUS_PANIC = 8,
} QlsStatus;

typedef enum QlsModeKind {
  QLS_MODE_KIND_VACUUM = 0,
  /**
   * `a` is the photon number.
   */
  QLS_MODE_KIND_FOCK = 1,
  /**
   * `a + ib` is the amplitude.
   */
  QLS_MODE_KIND_COHERENT = 2,
  /**
   * `a` is the mean photon number.
   */
  QLS_MODE_KIND_THERMAL = 3,
  /**
   * `a` is the squeezing magnitude, `b` the phase.
   */
  QLS_MODE_KIND_SQUEEZED = 4,
  QLS_MODE_KIND_CAT_EVEN = 5,
  QLS_MODE_KIND_CAT_ODD = 6,
} QlsModeKind;

typedef enum QlsSignalKind {
  QLS_SIGNAL_KIND_QUANTUM = 0,
  QLS_SIGNAL_KIND_CLASSICAL = 1,
  QLS_SIGNAL_KIND_P_AVERAGED = 2,
} QlsSignalKind;

typedef enum QlsOrder {
  QLS_ORDER_LINEAR = 1,
  QLS_ORDER_THIRD = 3,
} QlsOrder;

typedef struct QlsField QlsField;

typedef struct QlsMatter QlsMatter;

/**
 * One field mode and its state.
 */
typedef struct QlsMode {
  double frequency;
  double coupling;
  size_t truncation;
  enum QlsModeKind kind;
  double a;
  double b;
} QlsMode;

typedef struct QlsComplex {
  double re;
  double im;
} QlsComplex;

/**
 * One resonance of the fluctuation-dissipation check.
 */
typedef struct QlsFdtLine {
  double omega;
  double weight_plus_plus;
  double weight_plus_minus;
  double ratio;
  double expected;
} QlsFdtLine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *qls_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qls_version(void);

/**
 * Two-level system with transition frequency `omega0` and dipole `mu`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum QlsStatus qls_matter_new_two_level(double omega0,
                                        double mu,
                                        double epsilon,
                                        struct QlsMatter **out);

/**
 * Truncated harmonic oscillator with `levels` levels.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum QlsStatus qls_matter_new_harmonic(size_t levels,
                                       double omega0,
                                       double mu,
                                       double epsilon,
                                       struct QlsMatter **out);

/**
 * Ladder of `n + 1` levels with the given spacings and nearest-neighbour dipoles.
 *
 * # Safety
 * `spacings` and `dipoles` must each point to `n` readable doubles and `out`
 * to writable storage for one handle.
 */
enum QlsStatus qls_matter_new_ladder(const double *spacings,
                                     const double *dipoles,
                                     size_t n,
                                     double epsilon,
                                     struct QlsMatter **out);

/**
 * # Safety
 * `m` must be NULL or a handle from `qls_matter_new_*` not yet freed.
 */
void qls_matter_free(struct QlsMatter *m);

/**
 * Hilbert-space dimension, or 0 for NULL.
 *
 * # Safety
 * `m` must be NULL or a live matter handle.
 */
size_t qls_matter_dim(const struct QlsMatter *m);

/**
 * Product field state over `n` modes.
 *
 * # Safety
 * `modes` must point to `n` readable entries and `out` to writable storage
 * for one handle.
 */
enum QlsStatus qls_field_new(const struct QlsMode *modes, size_t n, struct QlsField **out);

/**
 * # Safety
 * `f` must be NULL or a handle from `qls_field_new` not yet freed.
 */
void qls_field_free(struct QlsField *f);

/**
 * Dimension of the joint field space, or 0 for NULL.
 *
 * # Safety
 * `f` must be NULL or a live field handle.
 */
size_t qls_field_dim(const struct QlsField *f);

/**
 * Linear susceptibility at `omega`. Pass `INFINITY` as `beta_t` for the
 * ground state.
 *
 * # Safety
 * `m` must be a live matter handle and `out` writable.
 */
enum QlsStatus qls_chi1(const struct QlsMatter *m,
                        double beta_t,
                        double omega,
                        struct QlsComplex *out);

/**
 * Permutation-symmetrized third-order susceptibility. `omega` must equal
 * `w1 + w2 + w3`.
 *
 * # Safety
 * `m` must be a live matter handle and `out` writable.
 */
enum QlsStatus qls_chi3(const struct QlsMatter *m,
                        double beta_t,
                        double omega,
                        double w1,
                        double w2,
                        double w3,
                        struct QlsComplex *out);

/**
 * Detected signal on mode `detect` at the current tuning. `gates` may be
 * NULL; otherwise it receives one gate per diagram (2 for linear order, 4
 * for third order).
 *
 * # Safety
 * Handles must be live, `total` writable, and `gates` NULL or writable for
 * the number of entries above.
 */
enum QlsStatus qls_signal(const struct QlsMatter *m,
                          double beta_t,
                          const struct QlsField *f,
                          size_t detect,
                          enum QlsSignalKind kind,
                          enum QlsOrder order,
                          double *total,
                          struct QlsComplex *gates);

/**
 * Line-resolved fluctuation-dissipation check at inverse temperature
 * `beta_t`. Writes up to `cap` lines and stores the line count in `count`;
 * returns `BufferTooSmall` when `cap` is short, with `count` still set.
 *
 * # Safety
 * `m` must be a live matter handle, `lines` NULL (with `cap == 0`) or
 * writable for `cap` entries, and `count` writable.
 */
enum QlsStatus qls_fdt_lines(const struct QlsMatter *m,
                             double beta_t,
                             struct QlsFdtLine *lines,
                             size_t cap,
                             size_t *count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QLSPEC_H */
