#ifndef CRITEX_H
#define CRITEX_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CritexStatus {
  CRITEX_STATUS_OK = 0,
  CRITEX_STATUS_DOMAIN = 1,
  CRITEX_STATUS_CONTRACT = 2,
  CRITEX_STATUS_ACCURACY = 3,
  CRITEX_STATUS_INSUFFICIENT_DATA = 4,
  CRITEX_STATUS_IO = 5,
  CRITEX_STATUS_JSON = 6,
  CRITEX_STATUS_NULL_POINTER = 7,
  CRITEX_STATUS_PANIC = 8,
} CritexStatus;

typedef enum CritexRegime {
  CRITEX_REGIME_GLOBAL_EXISTENCE = 0,
  CRITEX_REGIME_BLOW_UP = 1,
  CRITEX_REGIME_CRITICAL_OPEN = 2,
  CRITEX_REGIME_OUTSIDE_THEORY = 3,
} CritexRegime;

typedef enum CritexCurveKind {
  CRITEX_CURVE_KIND_DAMPED = 0,
  CRITEX_CURVE_KIND_HEAT = 1,
  CRITEX_CURVE_KIND_DIFFERENCE = 2,
} CritexCurveKind;

typedef enum CritexRunKind {
  CRITEX_RUN_KIND_COMPLETED = 0,
  CRITEX_RUN_KIND_BLOW_UP = 1,
  CRITEX_RUN_KIND_STEP_UNDERFLOW = 2,
} CritexRunKind;

/*
 Opaque radial spectral profile.
 */
typedef struct CritexRadialProfile CritexRadialProfile;

/*
 Opaque finished solver run.
 */
typedef struct CritexRun CritexRun;

typedef struct CritexPropagator {
  double k00;
  double k01;
  double k10;
  double k11;
  bool underflow;
} CritexPropagator;

typedef struct CritexSolverConfig {
  double p;
  double eps;
  double dt;
  double t_end;
  bool dealias;
  double theta;
  double growth_factor;
  double dt_min_ratio;
  size_t samples;
  bool nonlinear;
} CritexSolverConfig;

typedef struct CritexRunStatus {
  enum CritexRunKind kind;
  /*
   Blow-up time; zero for completed runs.
   */
  double time;
} CritexRunStatus;

typedef struct CritexHistoryRow {
  double t;
  double l2;
  double hs;
  double hneg;
  double maxabs;
  double energy;
} CritexHistoryRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null. The pointer stays
 valid until the next failing call on the same thread.
 */
const char *critex_last_error(void);

/*
 `1 + 2/n`.

 # Safety
 `result` must be null or point to writable memory.
 */
enum CritexStatus critex_p_fujita(double n, double *result);

/*
 `1 + 4/(n + 2γ)`.

 # Safety
 `result` must be null or point to writable memory.
 */
enum CritexStatus critex_p_crit(double n, double gamma, double *result);

/*
 Positive root of `2γ² + nγ - 2n = 0`.

 # Safety
 `result` must be null or point to writable memory.
 */
enum CritexStatus critex_gamma_tilde(double n, double *result);

/*
 Lifespan power `-2/(2p' - 2 - n/2 - γ)` for subcritical `p`.

 # Safety
 `result` must be null or point to writable memory.
 */
enum CritexStatus critex_lifespan_exponent(double p, double n, double gamma, double *result);

/*
 `1 - (n/4 + γ/2)(p - 1)`.

 # Safety
 `result` must be null or point to writable memory.
 */
enum CritexStatus critex_alpha0(double p, double n, double gamma, double *result);

/*
 `2n/(n + 2γ)`.

 # Safety
 `result` must be null or point to writable memory.
 */
enum CritexStatus critex_hls_pair(double gamma, double n, double *result);

/*
 Whether `n + 2 - 2p' < n/2 - γ`.

 # Safety
 `result` must be null or point to writable memory.
 */
enum CritexStatus critex_contradiction_gate(double n, double gamma, double p, bool *result);

/*
 Regime of `(n, γ, s, p)`.

 # Safety
 `result` must be null or point to writable memory.
 */
enum CritexStatus critex_classify_regime(double n,
                                         double gamma,
                                         double s,
                                         double p,
                                         enum CritexRegime *result);

/*
 Propagator matrix at time `t` and frequency `r`.

 # Safety
 `result` must be null or point to writable memory.
 */
enum CritexStatus critex_propagator(double t, double r, struct CritexPropagator *result);

/*
 `r^{-a}` on `(0, cutoff]` over a log grid on `[1e-6, 1e3]` with `points` nodes.

 # Safety
 `handle` must be null or point to writable memory.
 */
enum CritexStatus critex_radial_power_law(double dim,
                                          double a,
                                          double cutoff,
                                          size_t points,
                                          struct CritexRadialProfile **handle);

/*
 `exp(-w r²)` over a log grid on `[1e-6, 1e3]` with `points` nodes.

 # Safety
 `handle` must be null or point to writable memory.
 */
enum CritexStatus critex_radial_gaussian(double dim,
                                         double w,
                                         size_t points,
                                         struct CritexRadialProfile **handle);

/*
 Zero profile on the grid of `like`.

 # Safety
 `like` must be a live profile handle; `handle` must be null or writable.
 */
enum CritexStatus critex_radial_zeros_like(const struct CritexRadialProfile *like,
                                           struct CritexRadialProfile **handle);

/*
 Radial Sobolev norm of order `s`.

 # Safety
 `profile` must be a live handle; `result` must be null or writable.
 */
enum CritexStatus critex_radial_norm(const struct CritexRadialProfile *profile,
                                     double s,
                                     double *result);

/*
 Norm curve of the chosen evolution at `len` times, written to `norms`.

 # Safety
 `v0`, `v1` must be live handles; `times` and `norms` must hold `len` values.
 */
enum CritexStatus critex_radial_curve(const struct CritexRadialProfile *v0,
                                      const struct CritexRadialProfile *v1,
                                      enum CritexCurveKind kind,
                                      const double *times,
                                      size_t len,
                                      double s,
                                      double gamma,
                                      double *norms);

/*
 Release a profile; null is ignored.

 # Safety
 `profile` must be null or a handle not yet freed.
 */
void critex_radial_free(struct CritexRadialProfile *profile);

/*
 Solver configuration with every default filled in.
 */
struct CritexSolverConfig critex_solver_config_default(double p,
                                                       double eps,
                                                       double dt,
                                                       double t_end);

/*
 Evolve `(eps u0, eps u1)` on a periodic grid of `points^dim` samples and
 box length `length`.

 # Safety
 `config` must be valid; `u0`, `u1` must hold `len` values; `handle` must be
 null or writable.
 */
enum CritexStatus critex_run(const struct CritexSolverConfig *config,
                             size_t dim,
                             size_t points,
                             double length,
                             const double *u0,
                             const double *u1,
                             size_t len,
                             double s,
                             double gamma,
                             struct CritexRun **handle);

/*
 Final status of a run.

 # Safety
 `run` must be a live handle; `result` must be null or writable.
 */
enum CritexStatus critex_run_status(const struct CritexRun *run, struct CritexRunStatus *result);

/*
 Supremum of the weighted solution norm over the history.

 # Safety
 `run` must be a live handle; `result` must be null or writable.
 */
enum CritexStatus critex_run_weighted_sup(const struct CritexRun *run, double *result);

/*
 Number of history rows.

 # Safety
 `run` must be a live handle; `result` must be null or writable.
 */
enum CritexStatus critex_run_history_len(const struct CritexRun *run, size_t *result);

/*
 History row `index`.

 # Safety
 `run` must be a live handle; `result` must be null or writable.
 */
enum CritexStatus critex_run_history_row(const struct CritexRun *run,
                                         size_t index,
                                         struct CritexHistoryRow *result);

/*
 Release a run; null is ignored.

 # Safety
 `run` must be null or a handle not yet freed.
 */
void critex_run_free(struct CritexRun *run);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CRITEX_H */
