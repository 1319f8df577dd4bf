/* C interface for the bellchain library. Generated by cbindgen; do not edit. */

#ifndef BELLCHAIN_H
#define BELLCHAIN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call in this interface.
 */
typedef enum BellchainStatus {
  /**
   * The call succeeded and all requested outputs were written.
   */
  BellchainStatus_Ok = 0,
  /**
   * A required pointer argument was null.
   */
  BellchainStatus_NullPointer = 1,
  /**
   * An argument was out of range or inconsistent; see bellchain_last_error.
   */
  BellchainStatus_InvalidArgument = 2,
  /**
   * The interior-point solver failed to converge.
   */
  BellchainStatus_SolverFailure = 3,
  /**
   * An internal invariant failed; see bellchain_last_error.
   */
  BellchainStatus_Internal = 4,
} BellchainStatus;

/**
 * A measurement scenario: one list of analyzer angles per party.
 */
typedef struct BellchainScenario BellchainScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version of the underlying library as a static NUL-terminated string.
 * The pointer is valid for the lifetime of the process; do not free it.
 */
const char *bellchain_version(void);

/**
 * Message describing the most recent failure on the calling thread, or null
 * when no call on this thread has failed yet. The pointer stays valid until
 * the next failing call on the same thread; do not free it.
 */
const char *bellchain_last_error(void);

/**
 * Creates the equally spaced scenario with `size` settings per party.
 *
 * # Safety
 * `out` must point to writable storage for one pointer. On success it
 * receives a handle that must be released with [`bellchain_scenario_free`].
 */
enum BellchainStatus bellchain_scenario_equally_spaced(uintptr_t size,
                                                       struct BellchainScenario **out);

/**
 * Creates the smallest equally spaced scenario whose value on the maximally
 * entangled state stays below `epsilon / 2`. Writes the chosen size to
 * `out_size` when that pointer is non-null.
 *
 * # Safety
 * `out` must point to writable storage for one pointer; `out_size` must be
 * null or point to writable storage for one `uintptr_t`. On success `out`
 * receives a handle that must be released with [`bellchain_scenario_free`].
 */
enum BellchainStatus bellchain_scenario_for_epsilon(double epsilon,
                                                    uintptr_t *out_size,
                                                    struct BellchainScenario **out);

/**
 * Creates a scenario from caller-supplied analyzer angles in radians.
 *
 * # Safety
 * `alice` and `bob` must each point to `size` readable doubles, and `out`
 * must point to writable storage for one pointer. On success `out` receives
 * a handle that must be released with [`bellchain_scenario_free`].
 */
enum BellchainStatus bellchain_scenario_custom(const double *alice,
                                               const double *bob,
                                               uintptr_t size,
                                               struct BellchainScenario **out);

/**
 * Number of settings per party, or 0 when `scenario` is null.
 *
 * # Safety
 * `scenario` must be null or a handle returned by this interface that has
 * not been freed.
 */
uintptr_t bellchain_scenario_size(const struct BellchainScenario *scenario);

/**
 * Releases a scenario handle. Null is ignored.
 *
 * # Safety
 * `scenario` must be null or a handle returned by this interface, and must
 * not be used after this call.
 */
void bellchain_scenario_free(struct BellchainScenario *scenario);

/**
 * Chained measure of the two-qubit state with weight `alpha`, evaluated term
 * by term from the density matrix.
 *
 * # Safety
 * `scenario` must be a live handle from this interface and `out` must point
 * to writable storage for one double.
 */
enum BellchainStatus bellchain_chained_value(double alpha,
                                             const struct BellchainScenario *scenario,
                                             double *out);

/**
 * Chained measure via the closed form; agrees with
 * [`bellchain_chained_value`] to better than 1e-9.
 *
 * # Safety
 * Same contract as [`bellchain_chained_value`].
 */
enum BellchainStatus bellchain_chained_value_closed_form(double alpha,
                                                         const struct BellchainScenario *scenario,
                                                         double *out);

/**
 * Minimum of the chained measure over local deterministic strategies for a
 * scenario with `size` settings per party (exactly 1 for all sizes).
 *
 * # Safety
 * `out` must point to writable storage for one double.
 */
enum BellchainStatus bellchain_local_deterministic_minimum(uintptr_t size, double *out);

/**
 * Largest one-sided predictive advantage achievable by any signal-local,
 * setting-independent decomposition with `z_count` atoms, found by
 * bisecting linear-program feasibility. Optional outputs may be null.
 *
 * # Safety
 * `scenario` must be a live handle from this interface; `out_t_star` must
 * point to writable storage for one double; `out_a_star`, `out_sign`, and
 * `out_zero_certificate` must each be null or point to writable storage for
 * their type.
 */
enum BellchainStatus bellchain_max_advantage(double alpha,
                                             const struct BellchainScenario *scenario,
                                             uintptr_t z_count,
                                             double *out_t_star,
                                             uintptr_t *out_a_star,
                                             int *out_sign,
                                             bool *out_zero_certificate);

/**
 * Samples `rounds` measurement rounds cycling through the chain pairs and
 * writes the plug-in estimate and the high-confidence upper bound on the
 * chained measure. `out_estimate` may be null.
 *
 * # Safety
 * `scenario` must be a live handle from this interface; `out_certified`
 * must point to writable storage for one double; `out_estimate` must be
 * null or point to writable storage for one double.
 */
enum BellchainStatus bellchain_certified_epsilon(double alpha,
                                                 const struct BellchainScenario *scenario,
                                                 uint64_t rounds,
                                                 uint64_t seed,
                                                 double confidence,
                                                 double *out_estimate,
                                                 double *out_certified);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BELLCHAIN_H */
