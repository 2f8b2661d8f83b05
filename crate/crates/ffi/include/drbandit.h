#ifndef DRBANDIT_H
#define DRBANDIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum DrbStatus {
  DRB_STATUS_OK = 0,
  DRB_STATUS_NULL_POINTER = 1,
  DRB_STATUS_INVALID_UTF8 = 2,
  DRB_STATUS_PARSE = 3,
  DRB_STATUS_INVALID_ARGUMENT = 4,
  DRB_STATUS_CONFIG = 5,
  DRB_STATUS_IO = 6,
  DRB_STATUS_BUFFER_TOO_SMALL = 7,
  DRB_STATUS_OUT_OF_RANGE = 8,
  DRB_STATUS_PANIC = 9,
} DrbStatus;

// Policy of a result row.
typedef enum DrbPolicy {
  DRB_POLICY_ETC = 0,
  DRB_POLICY_UCB = 1,
  DRB_POLICY_CE_UCB = 2,
  DRB_POLICY_UNIFORM = 3,
} DrbPolicy;

// A parsed list of arm distributions.
typedef struct DrbArms DrbArms;

// Output of an experiment run.
typedef struct DrbResult DrbResult;

// A parsed distortion riskmetric.
typedef struct DrbSpec DrbSpec;

// One aggregated checkpoint of one policy.
typedef struct DrbRow {
  double sweep_param;
  uint32_t policy;
  uint64_t checkpoint;
  double mean;
  double min;
  double max;
  double std_error;
  uint64_t seed;
} DrbRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null if none.
//
// The pointer stays valid until the next failing call on the same thread.
const char *drb_last_error(void);

// Library version as a static nul-terminated string.
const char *drb_version(void);

// Parses a riskmetric token such as `gini`, `cvar:0.5` or `dualpower:2`.
//
// # Safety
// `token` must be a nul-terminated string and `out_spec` writable.
enum DrbStatus drb_spec_parse(const char *token, struct DrbSpec **out_spec);

// Releases a spec. Null is ignored.
//
// # Safety
// `spec` must come from [`drb_spec_parse`] and not be freed twice.
void drb_spec_free(struct DrbSpec *spec);

// Distortion function `h(u)` for `u` in `[0, 1]`.
//
// # Safety
// `spec` must be a live handle and `out_value` writable.
enum DrbStatus drb_spec_h(const struct DrbSpec *spec, double u, double *out_value);

// Hölder constant and exponent of a riskmetric.
//
// # Safety
// `spec` must be a live handle; both outputs writable.
enum DrbStatus drb_spec_holder(const struct DrbSpec *spec, double *out_l, double *out_q);

// Riskmetric of a finite distribution given by `n` atoms and masses.
//
// # Safety
// `values` and `masses` must point to `n` doubles each.
enum DrbStatus drb_choquet(const struct DrbSpec *spec,
                           const double *values,
                           const double *masses,
                           size_t n,
                           double *out_value);

// Parses arms such as `bern:0.4,bern:0.9`.
//
// # Safety
// `text` must be a nul-terminated string and `out_arms` writable.
enum DrbStatus drb_arms_parse(const char *text, struct DrbArms **out_arms);

// Number of arms, or 0 for a null handle.
//
// # Safety
// `arms` must be null or a live handle.
size_t drb_arms_count(const struct DrbArms *arms);

// Releases arms. Null is ignored.
//
// # Safety
// `arms` must come from [`drb_arms_parse`] and not be freed twice.
void drb_arms_free(struct DrbArms *arms);

// Optimal mixture over the simplex. `weights` receives one entry per arm
// and must hold at least `capacity` doubles; `BufferTooSmall` is returned
// when `capacity` is below the arm count.
//
// # Safety
// Handles must be live; `weights` must point to `capacity` doubles.
enum DrbStatus drb_oracle(const struct DrbSpec *spec,
                          const struct DrbArms *arms,
                          double resolution,
                          double *weights,
                          size_t capacity,
                          double *out_value);

// Runs a Monte-Carlo experiment described by `key = value` lines, using
// the same keys as the command-line config file. Missing keys keep their
// defaults.
//
// # Safety
// `config` must be a nul-terminated string and `out_result` writable.
enum DrbStatus drb_run_experiment(const char *config, struct DrbResult **out_result);

// Number of rows in a result, or 0 for a null handle.
//
// # Safety
// `result` must be null or a live handle.
size_t drb_result_row_count(const struct DrbResult *result);

// Copies row `index` into `out_row`. `policy` holds a [`DrbPolicy`] value.
//
// # Safety
// `result` must be a live handle and `out_row` writable.
enum DrbStatus drb_result_row(const struct DrbResult *result, size_t index, struct DrbRow *out_row);

// Writes the result as CSV. `out_len` always receives the byte length
// without the terminating nul. A null `buf` queries the length only;
// otherwise `BufferTooSmall` is returned unless `capacity > *out_len`.
//
// # Safety
// `result` must be live; `buf` null or pointing to `capacity` bytes.
enum DrbStatus drb_result_to_csv(const struct DrbResult *result,
                                 char *buf,
                                 size_t capacity,
                                 size_t *out_len);

// Releases a result. Null is ignored.
//
// # Safety
// `result` must come from [`drb_run_experiment`] and not be freed twice.
void drb_result_free(struct DrbResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DRBANDIT_H */
