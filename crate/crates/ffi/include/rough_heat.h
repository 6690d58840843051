#ifndef ROUGH_HEAT_H
#define ROUGH_HEAT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum RhScheme {
  RH_EULER = 0,
  RH_MILSTEIN = 1,
} RhScheme;

typedef enum RhStatus {
  RH_OK = 0,
  RH_NULL_POINTER = 1,
  RH_INVALID_ARGUMENT = 2,
  RH_CONFIG_ERROR = 3,
  RH_BLOW_UP = 4,
  RH_IO_ERROR = 5,
  RH_PANIC = 6,
} RhStatus;

// Sampled driver path.
typedef struct RhDriver RhDriver;

// Solver output.
typedef struct RhTrajectory RhTrajectory;

// Parameters of one solver run. Start from [`rh_sim_params_default`].
typedef struct RhSimParams {
  enum RhScheme scheme;
  // Euler: number of steps. Milstein: dyadic exponent.
  size_t time_mesh;
  size_t modes;
  double hurst;
  double kappa;
  // Strength of `f_k(x) = k(1 - x)/(1 + x^2)`.
  double k;
  size_t components;
  uint64_t seed;
  size_t oversample;
} RhSimParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *rh_version(void);

// Message of the last failed call on this thread; empty after a success.
// Valid until the next `rh_*` call on the same thread.
const char *rh_last_error(void);

// Euler run with `M = N = 1000`, `H = 0.6`, `κ = 100`, `k = 1`, one component.
enum RhStatus rh_sim_params_default(struct RhSimParams *out);

// fBm on `steps` uniform intervals of `[0, 1]` with `components` independent
// components.
enum RhStatus rh_driver_sample_fbm(double hurst,
                                   size_t steps,
                                   size_t components,
                                   uint64_t seed,
                                   struct RhDriver **out);

// Driver from caller samples: `(steps + 1) × components` values, row-major,
// first row zero.
enum RhStatus rh_driver_from_samples(const double *data,
                                     size_t steps,
                                     size_t components,
                                     double hurst,
                                     struct RhDriver **out);

void rh_driver_free(struct RhDriver *driver);

// Number of intervals, or 0 for a null handle.
size_t rh_driver_steps(const struct RhDriver *driver);

// Number of components, or 0 for a null handle.
size_t rh_driver_components(const struct RhDriver *driver);

// Copies the `(steps + 1) × components` samples, row-major.
enum RhStatus rh_driver_copy_samples(const struct RhDriver *driver, double *buf, size_t len);

// Runs the scheme in `params`. With a null `driver` one is sampled from
// `params.seed`; otherwise its step count must match the scheme's.
enum RhStatus rh_simulate(const struct RhSimParams *params,
                          const struct RhDriver *driver,
                          struct RhTrajectory **out);

void rh_trajectory_free(struct RhTrajectory *traj);

// Number of stored states (steps + 1), or 0 for a null handle.
size_t rh_trajectory_len(const struct RhTrajectory *traj);

// Spectral modes per state, or 0 for a null handle.
size_t rh_trajectory_dim(const struct RhTrajectory *traj);

enum RhStatus rh_trajectory_time(const struct RhTrajectory *traj, size_t index, double *out);

// Copies the `dim` eigenbasis coefficients of state `index`.
enum RhStatus rh_trajectory_copy_state(const struct RhTrajectory *traj,
                                       size_t index,
                                       double *buf,
                                       size_t len);

// Writes `Y_t(xi)` for every stored time into `buf` (length `len`).
enum RhStatus rh_trajectory_probe(const struct RhTrajectory *traj,
                                  double xi,
                                  double *buf,
                                  size_t len);

// `(1 - e^{-λh}) / (λh)`; NaN for negative or non-finite input.
double rh_weight1(double lambda, double h);

// `∫_0^1 e^{-λh(1-s)} s ds`; NaN for negative or non-finite input.
double rh_weight2(double lambda, double h);

// `sqrt(Σ λ_n^{2κ} y_n^2)` of `len` eigenbasis coefficients.
enum RhStatus rh_sobolev_norm(const double *coeffs, size_t len, double kappa, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROUGH_HEAT_H */
