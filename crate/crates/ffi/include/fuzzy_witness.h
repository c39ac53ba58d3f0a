#ifndef FUZZY_WITNESS_H
#define FUZZY_WITNESS_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum FwStatus {
  FW_STATUS_OK = 0,
  FW_STATUS_NULL_POINTER = 1,
  FW_STATUS_INVALID_PARAMETER = 2,
  FW_STATUS_DIMENSION_MISMATCH = 3,
  FW_STATUS_NO_VIOLATION_AT_LO = 4,
  FW_STATUS_NO_TRANSITION_AT_HI = 5,
  FW_STATUS_NO_VIOLATION_AT_PURE_STATE = 6,
  FW_STATUS_PANIC = 7,
} FwStatus;

typedef enum FwWitnessKind {
  FW_WITNESS_KIND_BELL = 0,
  FW_WITNESS_KIND_STEERING = 1,
} FwWitnessKind;

/**
 * Opaque correlator handle.
 */
typedef struct FwCorrelator FwCorrelator;

/**
 * Opaque witness handle.
 */
typedef struct FwWitness FwWitness;

typedef struct FwOptimizerConfig {
  size_t restarts;
  size_t max_iterations;
  double tolerance;
  uint64_t seed;
} FwOptimizerConfig;

/**
 * A located transition point.
 */
typedef struct FwTransition {
  double delta_sq;
  double ref_spread_sq;
  double p;
  double achieved_value;
  double bound;
  /**
   * Margin change per unit of the searched parameter near the crossing.
   */
  double slope;
} FwTransition;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *fw_last_error_message(void);

/**
 * Static description of a status code.
 */
const char *fw_status_description(enum FwStatus status);

struct FwOptimizerConfig fw_optimizer_config_default(void);

/**
 * Creates a correlator for macroscopicity `n`, visibility `p`, resolution
 * spread `delta` and reference spread `ref_spread`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum FwStatus fw_correlator_new(uint32_t n,
                                double p,
                                double delta,
                                double ref_spread,
                                struct FwCorrelator **out);

/**
 * # Safety
 * `corr` must come from [`fw_correlator_new`] and not be used afterwards.
 */
void fw_correlator_free(struct FwCorrelator *corr);

/**
 * Correlation at one pair of measurement angles.
 *
 * # Safety
 * `corr` must be a live handle and `out` valid for writes.
 */
enum FwStatus fw_correlator_value(const struct FwCorrelator *corr,
                                  double theta_i,
                                  double theta_j,
                                  double *out);

/**
 * Creates an `m`-setting Bell or steering witness.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum FwStatus fw_witness_new(enum FwWitnessKind kind, size_t m, struct FwWitness **out);

/**
 * # Safety
 * `witness` must come from [`fw_witness_new`] and not be used afterwards.
 */
void fw_witness_free(struct FwWitness *witness);

/**
 * Classical bound of the witness.
 *
 * # Safety
 * `witness` must be a live handle and `out` valid for writes.
 */
enum FwStatus fw_witness_bound(const struct FwWitness *witness, double *out);

/**
 * Witness value at the given angles; `alice` and `bob` each hold `m` values.
 *
 * # Safety
 * Handles must be live, `alice` and `bob` readable for `m` doubles, `out`
 * valid for writes.
 */
enum FwStatus fw_witness_evaluate(const struct FwWitness *witness,
                                  const struct FwCorrelator *corr,
                                  const double *alice,
                                  const double *bob,
                                  size_t m,
                                  double *out);

/**
 * Maximizes the witness over all angles. When `angles` is non-NULL it must
 * hold `2m` doubles and receives Alice's then Bob's optimal angles.
 *
 * # Safety
 * Handles must be live; `config` readable; `value` valid for writes;
 * `angles`, if non-NULL, writable for `angles_len` doubles.
 */
enum FwStatus fw_maximize(const struct FwWitness *witness,
                          const struct FwCorrelator *corr,
                          const struct FwOptimizerConfig *config,
                          double *value,
                          double *angles,
                          size_t angles_len);

/**
 * Critical δ² at fixed reference spread, bisected on `[lo, hi]`.
 *
 * # Safety
 * `witness` must be live, `config` readable and `out` valid for writes.
 */
enum FwStatus fw_find_critical_delta(const struct FwWitness *witness,
                                     const struct FwOptimizerConfig *config,
                                     uint32_t n,
                                     double p,
                                     double ref_spread,
                                     double lo,
                                     double hi,
                                     double tolerance,
                                     struct FwTransition *out);

/**
 * Critical Δ² at fixed resolution spread, bisected on `[lo, hi]`.
 *
 * # Safety
 * `witness` must be live, `config` readable and `out` valid for writes.
 */
enum FwStatus fw_find_critical_reference(const struct FwWitness *witness,
                                         const struct FwOptimizerConfig *config,
                                         uint32_t n,
                                         double p,
                                         double delta,
                                         double lo,
                                         double hi,
                                         double tolerance,
                                         struct FwTransition *out);

/**
 * Critical Werner visibility for fixed coarsening.
 *
 * # Safety
 * `witness` must be live, `config` readable and `out` valid for writes.
 */
enum FwStatus fw_find_critical_visibility(const struct FwWitness *witness,
                                          const struct FwOptimizerConfig *config,
                                          uint32_t n,
                                          double delta,
                                          double ref_spread,
                                          double tolerance,
                                          struct FwTransition *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FUZZY_WITNESS_H */
