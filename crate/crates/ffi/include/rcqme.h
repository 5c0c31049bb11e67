#ifndef RCQME_H
#define RCQME_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum RcqmeStatus {
  RCQME_STATUS_OK = 0,
  RCQME_STATUS_NULL_POINTER = 1,
  RCQME_STATUS_INVALID_PARAMETER = 2,
  RCQME_STATUS_DOMAIN = 3,
  RCQME_STATUS_RESOURCE = 4,
  RCQME_STATUS_NUMERICAL = 5,
  RCQME_STATUS_UNDEFINED_RATIO = 6,
  RCQME_STATUS_CONFIG = 7,
  RCQME_STATUS_PANIC = 8,
} RcqmeStatus;

typedef enum RcqmeMethod {
  // Reaction-coordinate master equation; needs `m >= 1` levels per mode.
  RCQME_METHOD_RC_QME = 0,
  // Bare spin with the Brownian spectral densities.
  RCQME_METHOD_BMR = 1,
  // Effective spin-boson model, default tolerance and level cap.
  RCQME_METHOD_EFF_SB = 2,
} RcqmeMethod;

// Opaque junction model.
typedef struct RcqmeModel RcqmeModel;

// Parameters of one bath, all in units of the reference splitting.
typedef struct RcqmeBath {
  double lambda;
  double omega_rc;
  double gamma;
  double cutoff;
  double temperature;
} RcqmeBath;

typedef struct RcqmeEffective {
  double delta_eff;
  double f_hot;
  double f_cold;
  size_t m_used;
  bool converged;
  bool ill_conditioned;
} RcqmeEffective;

typedef struct RcqmeRectification {
  double current_forward;
  double current_reverse;
  double ratio;
} RcqmeRectification;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *rcqme_version(void);

// Message of the most recent failure on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *rcqme_last_error(void);

// Creates a model. On success `*out` owns a handle that must be released
// with `rcqme_model_free`.
//
// # Safety
// `hot`, `cold` and `out` must be valid pointers or NULL.
enum RcqmeStatus rcqme_model_new(double epsilon,
                                 double delta,
                                 const struct RcqmeBath *hot,
                                 const struct RcqmeBath *cold,
                                 struct RcqmeModel **out);

// Releases a handle. NULL is ignored.
//
// # Safety
// `model` must come from `rcqme_model_new` and not be used afterwards.
void rcqme_model_free(struct RcqmeModel *model);

// Sets both coupling strengths. The model is unchanged on failure.
//
// # Safety
// `model` must be a live handle or NULL.
enum RcqmeStatus rcqme_model_set_couplings(struct RcqmeModel *model,
                                           double lambda_hot,
                                           double lambda_cold);

// Sets both bath temperatures. The model is unchanged on failure.
//
// # Safety
// `model` must be a live handle or NULL.
enum RcqmeStatus rcqme_model_set_temperatures(struct RcqmeModel *model,
                                              double t_hot,
                                              double t_cold);

// Steady-state heat current out of the hot bath, in units of the squared
// reference splitting. `kind` is an `RcqmeMethod` value; `m` is the number
// of levels per reaction coordinate and is ignored by the other methods.
//
// # Safety
// `model` and `out` must be valid pointers or NULL.
enum RcqmeStatus rcqme_current(const struct RcqmeModel *model,
                               uint32_t kind,
                               size_t m,
                               double *out);

// Effective splitting and couplings, increasing the level count until the
// relative change drops below `tol` or `m_max` is reached. Non-positive
// `tol` or zero `m_max` select the library defaults.
//
// # Safety
// `model` and `out` must be valid pointers or NULL.
enum RcqmeStatus rcqme_effective_params(const struct RcqmeModel *model,
                                        double tol,
                                        size_t m_max,
                                        struct RcqmeEffective *out);

// Forward and reverse currents for `lambda_hot = lambda_mean (1 - chi)`,
// `lambda_cold = lambda_mean (1 + chi)`, and their ratio. `kind` and `m`
// are as in `rcqme_current`.
//
// # Safety
// `model` and `out` must be valid pointers or NULL.
enum RcqmeStatus rcqme_rectification(const struct RcqmeModel *model,
                                     double lambda_mean,
                                     double chi,
                                     uint32_t kind,
                                     size_t m,
                                     struct RcqmeRectification *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RCQME_H */
