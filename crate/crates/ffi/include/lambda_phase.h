/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef LAMBDA_PHASE_H
#define LAMBDA_PHASE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LpStatus {
  LP_STATUS_OK = 0,
  LP_STATUS_NULL_POINTER = 1,
  LP_STATUS_INVALID_ARGUMENT = 2,
  LP_STATUS_NUMERICAL = 3,
  LP_STATUS_IO = 4,
  LP_STATUS_VERIFY_FAILED = 5,
  LP_STATUS_PANIC = 6,
} LpStatus;

// Opaque simulation handle.
typedef struct LpSimulation LpSimulation;

typedef struct LpComplex {
  double re;
  double im;
} LpComplex;

// Couplings, detunings, mean photon numbers, initial atomic amplitudes and
// Poisson tail threshold.
typedef struct LpParams {
  double g_a;
  double g_b;
  double delta_a;
  double delta_b;
  double nbar_a;
  double nbar_b;
  struct LpComplex c[3];
  double epsilon;
} LpParams;

// Phase probabilities are ordered `[P(0), P(+π/2), P(−π/2)]`.
typedef struct LpSample {
  double time;
  double p13[3];
  double p23[3];
  double p12[3];
  double populations[3];
  double norm;
} LpSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null. The pointer stays
// valid until the next failing call on the same thread.
const char *lp_last_error_message(void);

// Builds the initial state and diagonalizes every populated subspace.
//
// # Safety
// `params` must point to a valid `LpParams`; `out` must be writable.
enum LpStatus lp_simulation_new(const struct LpParams *params, struct LpSimulation **out);

// # Safety
// `sim` must come from `lp_simulation_new` and not be freed twice. Null is ignored.
void lp_simulation_free(struct LpSimulation *sim);

// Number of populated invariant subspaces.
//
// # Safety
// `sim` must be a live handle; `out` must be writable.
enum LpStatus lp_simulation_subspace_count(const struct LpSimulation *sim, size_t *out);

// Distributions at interaction-picture time `t ≥ 0`.
//
// # Safety
// `sim` must be a live handle; `out` must be writable.
enum LpStatus lp_simulation_sample(const struct LpSimulation *sim, double t, struct LpSample *out);

// Samples `len` times into `out[0..len]`.
//
// # Safety
// `times` must hold `len` readable values and `out` `len` writable samples.
enum LpStatus lp_simulation_run(const struct LpSimulation *sim,
                                const double *times,
                                size_t len,
                                struct LpSample *out);

// Parameters and τ grid of a built-in scenario (`fig2`, `fig3a`, `fig3b`, `fig4`).
// `tau_max` and `tau_steps` may be null.
//
// # Safety
// `name` must be a nul-terminated string; non-null outputs must be writable.
enum LpStatus lp_preset_params(const char *name,
                               struct LpParams *out,
                               double *tau_max,
                               size_t *tau_steps);

// Runs a verification suite. Writes the number of failed checks to
// `failures` (if non-null) and returns `LP_STATUS_VERIFY_FAILED` when it is nonzero.
//
// # Safety
// `suite` must be a nul-terminated string; `failures` may be null.
enum LpStatus lp_verify(const char *suite, size_t *failures);

// `Q_n = √(e^{−n̄} n̄ⁿ / n!)`.
//
// # Safety
// `out` must be writable.
enum LpStatus lp_poisson_weight(double nbar, uint64_t n, double *out);

// Smallest `N` with `Σ_{n≤N} Q_n² ≥ 1 − epsilon`.
//
// # Safety
// `out` must be writable.
enum LpStatus lp_truncation_cutoff(double nbar, double epsilon, uint64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LAMBDA_PHASE_H */
