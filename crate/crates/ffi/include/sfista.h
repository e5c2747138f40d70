#ifndef SFISTA_H
#define SFISTA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum SfStatus {
  SF_STATUS_OK = 0,
  SF_STATUS_NULL_POINTER = 1,
  SF_STATUS_INVALID_ARGUMENT = 2,
  SF_STATUS_DIMENSION_MISMATCH = 3,
  SF_STATUS_INVALID_CONFIG = 4,
  SF_STATUS_INVALID_START = 5,
  SF_STATUS_NUMERIC_FAILURE = 6,
  SF_STATUS_UNDEFINED_CERTIFICATE = 7,
  SF_STATUS_GROWTH_OVERFLOW = 8,
  SF_STATUS_UNSUPPORTED_BOUND = 9,
  SF_STATUS_UNSUPPORTED = 10,
  SF_STATUS_PARSE = 11,
  SF_STATUS_IO = 12,
  SF_STATUS_PANIC = 13,
} SfStatus;

typedef enum SfProblemKind {
  SF_PROBLEM_KIND_LASSO = 0,
  SF_PROBLEM_KIND_ELASTIC_NET = 1,
  SF_PROBLEM_KIND_BOX_QP = 2,
  SF_PROBLEM_KIND_LOGISTIC_L2 = 3,
} SfProblemKind;

typedef enum SfCriterionKind {
  SF_CRITERION_KIND_NONE = 0,
  SF_CRITERION_KIND_FUNCTION_GAP = 1,
  SF_CRITERION_KIND_STATIONARITY = 2,
  SF_CRITERION_KIND_RELATIVE = 3,
  SF_CRITERION_KIND_ALTERNATE_RELATIVE = 4,
  SF_CRITERION_KIND_ABSOLUTE = 5,
} SfCriterionKind;

typedef enum SfStopReason {
  SF_STOP_REASON_CONVERGED = 0,
  SF_STOP_REASON_MAX_ITER = 1,
  SF_STOP_REASON_GROWTH_OVERFLOW = 2,
} SfStopReason;

/**
 * Opaque problem handle.
 */
typedef struct SfProblem SfProblem;

/**
 * Opaque solver handle. Keeps its problem alive on its own.
 */
typedef struct SfSolver SfSolver;

/**
 * Generator parameters. Fields a kind does not use must keep the values
 * returned by `sf_instance_params_default`.
 */
typedef struct SfInstanceParams {
  double reg;
  double ridge;
  double h_ridge;
  double box_lo;
  double box_hi;
  /**
   * Nonzero selects the diagonal `box_qp` variant.
   */
  int32_t diagonal;
} SfInstanceParams;

/**
 * `f(x)` for a vector of length `n`.
 */
typedef double (*SfValueFn)(void *user, const double *x, size_t n);

/**
 * Writes `∇f(x)` into `out` (length `n`).
 */
typedef void (*SfGradientFn)(void *user, const double *x, size_t n, double *out);

/**
 * Writes `prox_{step h}(x)` into `out` (length `n`).
 */
typedef void (*SfProxFn)(void *user, const double *x, size_t n, double step, double *out);

/**
 * User-supplied problem `f + h`. `h_value` returns `INFINITY` outside
 * `dom h`. The callbacks may be invoked from several threads at once and
 * `user_data` must stay valid until the problem handle is freed.
 */
typedef struct SfCallbacks {
  void *user_data;
  SfValueFn f_value;
  SfGradientFn f_gradient;
  double l_bar_f;
  double mu_bar_f;
  SfValueFn h_value;
  SfProxFn h_prox;
  double mu_bar_h;
} SfCallbacks;

/**
 * Stopping rule. `value` is `eps_bar`, `rho`, `sigma_tilde`, `sigma` or
 * `eps` depending on `kind`; `eta_tol` is read only by `ABSOLUTE`.
 */
typedef struct SfCriterion {
  enum SfCriterionKind kind;
  double value;
  double eta_tol;
} SfCriterion;

typedef struct SfSolverConfig {
  double l_f;
  double mu_f;
  double mu_h;
  /**
   * Cap on the total iteration count `k`.
   */
  uint64_t max_iter;
  struct SfCriterion criterion;
} SfSolverConfig;

/**
 * Residuals at the current iterate (`k >= 1`).
 */
typedef struct SfCertificates {
  double norm_u;
  double norm_v;
  double eta;
} SfCertificates;

typedef struct SfBoundInputs {
  double d0;
  double l_f;
  double l_f_bar;
  double mu_f;
  double mu;
} SfBoundInputs;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or an empty string.
 * The pointer stays valid until the next call on the same thread.
 */
const char *sf_last_error(void);

/**
 * Static string naming the library version.
 */
const char *sf_version(void);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum SfStatus sf_instance_params_default(enum SfProblemKind kind, struct SfInstanceParams *out);

/**
 * Generates a seeded test instance. `params` may be null for the defaults.
 *
 * # Safety
 * `params` must be null or valid; `out` must be a valid pointer.
 */
enum SfStatus sf_problem_generate(enum SfProblemKind kind,
                                  uint64_t seed,
                                  size_t m,
                                  size_t n,
                                  const struct SfInstanceParams *params,
                                  struct SfProblem **out);

/**
 * Wraps user callbacks as a problem of dimension `dim`.
 *
 * # Safety
 * `callbacks` and `out` must be valid pointers. See [`SfCallbacks`] for the
 * contract on the callbacks themselves.
 */
enum SfStatus sf_problem_from_callbacks(const struct SfCallbacks *callbacks,
                                        size_t dim,
                                        struct SfProblem **out);

/**
 * # Safety
 * `problem` must be null or a handle from this library, freed once.
 */
void sf_problem_free(struct SfProblem *problem);

/**
 * Dimension of the problem, 0 for a null handle.
 *
 * # Safety
 * `problem` must be null or a live handle.
 */
size_t sf_problem_dim(const struct SfProblem *problem);

/**
 * `L_bar_f`, `mu_bar_f`, `mu_bar_h`. Any output pointer may be null.
 *
 * # Safety
 * `problem` must be a live handle; non-null outputs must be valid.
 */
enum SfStatus sf_problem_constants(const struct SfProblem *problem,
                                   double *l_bar_f,
                                   double *mu_bar_f,
                                   double *mu_bar_h);

/**
 * `phi(x)`, written as `INFINITY` outside `dom h`.
 *
 * # Safety
 * `problem` must be a live handle, `x` must hold `n` values, `out` valid.
 */
enum SfStatus sf_problem_objective(const struct SfProblem *problem,
                                   const double *x,
                                   size_t n,
                                   double *out);

/**
 * Optimal value recorded with a generated instance. Callback problems
 * have none and return `SF_STATUS_UNSUPPORTED`.
 *
 * # Safety
 * `problem` must be a live handle and `out` valid.
 */
enum SfStatus sf_problem_reference_value(const struct SfProblem *problem, double *out);

/**
 * Default settings for `problem`: `L_f = 1.25 L_bar_f`, all available
 * strong convexity, 10000 iterations, no criterion.
 *
 * # Safety
 * `problem` must be a live handle and `out` valid.
 */
enum SfStatus sf_solver_config_default(const struct SfProblem *problem, struct SfSolverConfig *out);

/**
 * Starts a solver at `x0` (length `n`), or at `prox_h(0)` when `x0` is null.
 *
 * # Safety
 * `problem` and `config` must be valid, `x0` null or holding `n` values,
 * `out` valid.
 */
enum SfStatus sf_solver_new(const struct SfProblem *problem,
                            const struct SfSolverConfig *config,
                            const double *x0,
                            size_t n,
                            struct SfSolver **out);

/**
 * # Safety
 * `solver` must be null or a handle from this library, freed once.
 */
void sf_solver_free(struct SfSolver *solver);

/**
 * One iteration. Returns `SF_STATUS_GROWTH_OVERFLOW` without changing the
 * state when `A_{k+1}` would overflow.
 *
 * # Safety
 * `solver` must be a live handle.
 */
enum SfStatus sf_solver_step(struct SfSolver *solver);

/**
 * Iterates until the configured criterion holds, `k` reaches `max_iter`
 * or `A_k` would overflow. `stop` may be null.
 *
 * # Safety
 * `solver` must be a live handle; `stop` null or valid.
 */
enum SfStatus sf_solver_run(struct SfSolver *solver, enum SfStopReason *stop);

/**
 * Iteration count `k`, 0 for a null handle.
 *
 * # Safety
 * `solver` must be null or a live handle.
 */
uint64_t sf_solver_iteration(const struct SfSolver *solver);

/**
 * `A_k` and `τ_k`. Either output may be null.
 *
 * # Safety
 * `solver` must be a live handle; non-null outputs valid.
 */
enum SfStatus sf_solver_coefficients(const struct SfSolver *solver, double *big_a, double *tau);

/**
 * Copies the output iterate `y_k` into `out` (length `n`).
 *
 * # Safety
 * `solver` must be a live handle and `out` hold `n` values.
 */
enum SfStatus sf_solver_copy_y(const struct SfSolver *solver, double *out, size_t n);

/**
 * Copies the auxiliary iterate `x_k` into `out` (length `n`).
 *
 * # Safety
 * `solver` must be a live handle and `out` hold `n` values.
 */
enum SfStatus sf_solver_copy_x(const struct SfSolver *solver, double *out, size_t n);

/**
 * `phi(y_k)`.
 *
 * # Safety
 * `solver` must be a live handle and `out` valid.
 */
enum SfStatus sf_solver_objective(const struct SfSolver *solver, double *out);

/**
 * `||u_k||`, `||v_k||` and `eta_k`. Undefined before the first step.
 *
 * # Safety
 * `solver` must be a live handle and `out` valid.
 */
enum SfStatus sf_solver_certificates(const struct SfSolver *solver, struct SfCertificates *out);

/**
 * Iterations sufficient for `criterion` under the given constants.
 *
 * # Safety
 * `criterion`, `inputs` and `out` must be valid pointers.
 */
enum SfStatus sf_predict_iterations(const struct SfCriterion *criterion,
                                    const struct SfBoundInputs *inputs,
                                    uint64_t *out);

/**
 * Lower bound on `A_k` after `k` iterations.
 */
double sf_a_lower_bound(uint64_t k, double l_f, double mu_f, double mu);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SFISTA_H */
