#ifndef SHC_H
#define SHC_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum ShcStatus {
  SHC_STATUS_OK = 0,
  SHC_STATUS_NULL_POINTER = 1,
  SHC_STATUS_INVALID_ARGUMENT = 2,
  SHC_STATUS_INVALID_MODEL = 3,
  SHC_STATUS_CONFIG = 4,
  SHC_STATUS_NUMERIC = 5,
  SHC_STATUS_PRECONDITION = 6,
  SHC_STATUS_DIVERGENT_PERIMETER = 7,
  SHC_STATUS_IO = 8,
  SHC_STATUS_PANIC = 9,
} ShcStatus;

/**
 * Opaque domain handle.
 */
typedef struct ShcDomain ShcDomain;

/**
 * Opaque Lévy model handle.
 */
typedef struct ShcModel ShcModel;

/**
 * Path simulation settings; zero `steps` selects the default of 256.
 */
typedef struct ShcSimOptions {
  uint64_t n_paths;
  uint32_t steps;
  uint64_t seed;
  bool antithetic;
} ShcSimOptions;

/**
 * Monte Carlo or quadrature result.
 */
typedef struct ShcEstimate {
  double value;
  double std_error;
  uint64_t n_samples;
  uint64_t seed;
} ShcEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *shc_version(void);

/**
 * Message of the last failing call on this thread. Valid until the next
 * failing call; never null.
 */
const char *shc_last_error(void);

/**
 * Brownian motion with identity diffusion matrix.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum ShcStatus shc_model_brownian(size_t dim, struct ShcModel **out);

/**
 * Isotropic β-stable process, 0 < β < 2.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum ShcStatus shc_model_stable(size_t dim, double beta, struct ShcModel **out);

/**
 * Model from a TOML table with the same keys as the `[model]` section of an
 * experiment config, e.g. `preset = "truncated-stable"\nbeta = 0.5`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string; `out` must be writable.
 */
enum ShcStatus shc_model_from_toml(const char *spec, struct ShcModel **out);

/**
 * # Safety
 * `model` must be null or a handle from a `shc_model_*` constructor that
 * has not been freed.
 */
void shc_model_free(struct ShcModel *model);

/**
 * # Safety
 * `model` must be a live handle.
 */
size_t shc_model_dim(const struct ShcModel *model);

/**
 * 1 for unbounded variation, 0 for bounded variation, -1 on error.
 *
 * # Safety
 * `model` must be a live handle.
 */
int shc_model_unbounded_variation(const struct ShcModel *model);

/**
 * Scale function φ(r).
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum ShcStatus shc_scale_function(const struct ShcModel *model, double r, double *out);

/**
 * Ball B(center, radius); `center` may be null for the origin.
 *
 * # Safety
 * `center` must be null or point to `dim` doubles; `out` must be writable.
 */
enum ShcStatus shc_domain_ball(size_t dim,
                               const double *center,
                               double radius,
                               struct ShcDomain **out);

/**
 * # Safety
 * `domain` must be null or a live handle from [`shc_domain_ball`].
 */
void shc_domain_free(struct ShcDomain *domain);

/**
 * E[sup_{s≤t} ⟨X_s, ν⟩ ∧ b].
 *
 * # Safety
 * `model` must be a live handle, `nu` must point to `dim` doubles and `out`
 * must be writable.
 */
enum ShcStatus shc_sup_functional(const struct ShcModel *model,
                                  const double *nu,
                                  double t,
                                  double b,
                                  struct ShcSimOptions opts,
                                  struct ShcEstimate *out);

/**
 * P(τ_{B(0,r)} ≤ t).
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum ShcStatus shc_exit_probability_ball(const struct ShcModel *model,
                                         double r,
                                         double t,
                                         struct ShcSimOptions opts,
                                         struct ShcEstimate *out);

/**
 * |D| − Q_D(t), integrating over the whole domain.
 *
 * # Safety
 * `model` and `domain` must be live handles and `out` writable.
 */
enum ShcStatus shc_heat_content_deficit(const struct ShcModel *model,
                                        const struct ShcDomain *domain,
                                        double t,
                                        struct ShcSimOptions opts,
                                        struct ShcEstimate *out);

/**
 * Per_X(D) by deterministic quadrature. Fails with
 * `DivergentPerimeter` for unbounded-variation models.
 *
 * # Safety
 * `model` and `domain` must be live handles and `out` writable.
 */
enum ShcStatus shc_perimeter(const struct ShcModel *model,
                             const struct ShcDomain *domain,
                             struct ShcEstimate *out);

/**
 * Runs a dichotomy experiment from TOML config text. On success `json_out`
 * receives the report (free with [`shc_string_free`]) and `outcome` the
 * verdict: 0 pass, 2 fail, 3 inconclusive.
 *
 * # Safety
 * `config` must be NUL-terminated; `json_out` and `outcome` must be writable.
 */
enum ShcStatus shc_run_dichotomy(const char *config, char **json_out, int *outcome);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void shc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SHC_H */
