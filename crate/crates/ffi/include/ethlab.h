#ifndef ETHLAB_H
#define ETHLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Density-of-states bins used when building ansatz inputs.
 */
#define ETHLAB_DENSITY_BINS 64

/**
 * Result of every fallible call.
 */
typedef enum {
  ETHLAB_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  ETHLAB_STATUS_NULL_POINTER = 1,
  /**
   * Malformed arguments: bad dimensions, too-small buffers, unknown names.
   */
  ETHLAB_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Parameters that describe no valid system.
   */
  ETHLAB_STATUS_CONFIGURATION = 3,
  /**
   * The computation itself failed.
   */
  ETHLAB_STATUS_COMPUTE = 4,
  /**
   * A Rust panic was caught at the boundary.
   */
  ETHLAB_STATUS_PANIC = 5,
} EthlabStatus;

/**
 * A diagonalized bipartite system.
 */
typedef struct EthlabSystem EthlabSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *ethlab_last_error(void);

/**
 * Mixed-field Ising chain of `l` sites cut after `l_a` sites.
 *
 * # Safety
 * `out` must be null or valid for a pointer write.
 */
EthlabStatus ethlab_chain_create(size_t l,
                                 size_t l_a,
                                 double j,
                                 double h_x,
                                 double h_z,
                                 EthlabSystem **out);

/**
 * Random bipartite system with GOE factors and a coupling on `l_i` qubits
 * straddling the cut, scaled to `‖H_I‖ = f ‖H_0‖`.
 *
 * # Safety
 * `out` must be null or valid for a pointer write.
 */
EthlabStatus ethlab_random_create(size_t l_a,
                                  size_t l_b,
                                  size_t l_i,
                                  double f,
                                  uint64_t seed,
                                  EthlabSystem **out);

/**
 * Releases a system. Null is ignored.
 *
 * # Safety
 * `sys` must be null or a handle from a create function not yet freed.
 */
void ethlab_system_free(EthlabSystem *sys);

/**
 * Total, A and B dimensions. Any output pointer may be null.
 *
 * # Safety
 * `sys` must be a live handle; non-null outputs must be writable.
 */
EthlabStatus ethlab_system_dims(const EthlabSystem *sys, size_t *dim, size_t *dim_a, size_t *dim_b);

/**
 * Copies the ascending eigenvalues of `H_T` into `buf`, which must hold
 * at least `dim` values.
 *
 * # Safety
 * `sys` must be a live handle and `buf` valid for `len` writes.
 */
EthlabStatus ethlab_system_eigenvalues(const EthlabSystem *sys, double *buf, size_t len);

/**
 * Scrambling width `σ_S` measured over the central `center_fraction` of
 * the spectrum.
 *
 * # Safety
 * `sys` must be a live handle and `out` writable.
 */
EthlabStatus ethlab_sigma_s(const EthlabSystem *sys, double center_fraction, double *out);

/**
 * Smallest local dimension `D_O` on which an operator with these
 * eigenvalues can act.
 *
 * # Safety
 * `values` must be valid for `len` reads and `d_o` writable.
 */
EthlabStatus ethlab_localizability(const double *values, size_t len, double tol, size_t *d_o);

/**
 * Predicted mean `|O_αβ|²` at mean energy `ebar` for each of the `len`
 * values in `omegas`, written to `out`. `model` is a model name such as
 * `"exp_decay_flat_A"`.
 *
 * # Safety
 * `sys` must be a live handle, `model` a nul-terminated string, and
 * `omegas` and `out` valid for `len` elements.
 */
EthlabStatus ethlab_predict(const EthlabSystem *sys,
                            const char *model,
                            double sigma_s,
                            double o2bar,
                            double ebar,
                            const double *omegas,
                            size_t len,
                            double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ETHLAB_H */
