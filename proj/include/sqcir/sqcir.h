/*
 * C interface to the SQCIR mob-propagation toolkit.
 *
 * Every call returns an sqcir_status; on failure a human-readable message is
 * available from sqcir_last_error() on the calling thread until the next
 * call. Objects are opaque handles released with their matching *_free.
 * Strings returned through char** out-parameters are owned by the caller and
 * released with sqcir_string_free.
 */
#ifndef SQCIR_SQCIR_H
#define SQCIR_SQCIR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define SQCIR_API __declspec(dllexport)
#else
#  define SQCIR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sqcir_status {
  SQCIR_OK = 0,
  SQCIR_E_ARGUMENT = 1,      /* null pointer, bad index or option */
  SQCIR_E_INVALID_INPUT = 2, /* malformed data, non-finite values, dimensions */
  SQCIR_E_INVALID_PARAMETER = 3,
  SQCIR_E_PARSE = 4,         /* config JSON syntax; message has line/column */
  SQCIR_E_SCHEMA = 5,        /* unknown or mistyped config field */
  SQCIR_E_INVARIANT = 6,     /* value out of range; message names the field */
  SQCIR_E_STEP_SIZE = 7,     /* negative compartment; retry with smaller h */
  SQCIR_E_DIVERGENCE = 8,
  SQCIR_E_CONVERGENCE = 9,
  SQCIR_E_DEGENERATE = 10,
  SQCIR_E_UNDEFINED = 11,    /* e.g. relative error against a zero series */
  SQCIR_E_FIT_FAILURE = 12,
  SQCIR_E_IO = 13,
  SQCIR_E_INTERNAL = 99
} sqcir_status;

typedef struct sqcir_params {
  double lambda;
  double alpha;
  double epsilon0;
  double delta;
  double mu;
  double nu;
  double phi;
} sqcir_params;

typedef struct sqcir_state {
  double s, q, c, i, r;
} sqcir_state;

typedef struct sqcir_stability {
  double r0_paper;
  double r0_ngm;
  double eigenvalues_mfe[5];
  int stable;              /* 1 when every MFE eigenvalue is negative */
  int criterion_agreement; /* 1 when (r0_paper < 1) predicts `stable` */
} sqcir_stability;

typedef struct sqcir_thresholds {
  double epsilon_c;
  double lambda_c;
  double phi_c;
} sqcir_thresholds;

typedef struct sqcir_sensitivity {
  double pi_lambda;
  double pi_epsilon;
  double pi_phi;
  double pi_nu;
} sqcir_sensitivity;

typedef struct sqcir_config sqcir_config;
typedef struct sqcir_trajectory sqcir_trajectory;
typedef struct sqcir_series sqcir_series;

SQCIR_API const char* sqcir_version(void);
SQCIR_API const char* sqcir_last_error(void);
SQCIR_API const char* sqcir_status_name(sqcir_status status);
SQCIR_API void sqcir_string_free(char* text);

/* ---- configuration ---------------------------------------------------- */

SQCIR_API sqcir_status sqcir_config_load(const char* path, sqcir_config** out);
SQCIR_API sqcir_status sqcir_config_parse(const char* json_text, sqcir_config** out);
/* Preset with default initial state and integrator settings. */
SQCIR_API sqcir_status sqcir_config_from_preset(const char* name, sqcir_config** out);
SQCIR_API void sqcir_config_free(sqcir_config* cfg);
SQCIR_API sqcir_status sqcir_config_params(const sqcir_config* cfg, sqcir_params* out);
SQCIR_API sqcir_status sqcir_config_initial(const sqcir_config* cfg, sqcir_state* out);
/* Full effective configuration as JSON. */
SQCIR_API sqcir_status sqcir_config_to_json(const sqcir_config* cfg, char** out);

/* ---- model core and analytics on plain values -------------------------- */

SQCIR_API sqcir_status sqcir_derivative_reduced(const sqcir_state* state,
                                                const sqcir_params* params, double epsilon_t,
                                                sqcir_state* out);
/* `states`, `out`: k entries. `t_matrix`: k*k row-major (may be NULL for no
 * mobility). `per_region`: k parameter sets. */
SQCIR_API sqcir_status sqcir_derivative_network(size_t k, const sqcir_state* states,
                                                const double* t_matrix,
                                                const sqcir_params* per_region,
                                                double epsilon_t, sqcir_state* out);
SQCIR_API double sqcir_total_population(const sqcir_state* state);
SQCIR_API int sqcir_in_invariant_region(const sqcir_state* state, const sqcir_params* params);
SQCIR_API double sqcir_closed_form_total(double n0, const sqcir_params* params, double t);

SQCIR_API sqcir_status sqcir_r0_paper(const sqcir_params* params, double* out);
SQCIR_API sqcir_status sqcir_r0_next_generation(const sqcir_params* params, double* out);
SQCIR_API sqcir_status sqcir_effective_r(const sqcir_params* params, double m, double* out);
SQCIR_API sqcir_status sqcir_mob_free_equilibrium(const sqcir_params* params, sqcir_state* out);
SQCIR_API sqcir_status sqcir_endemic_closed(const sqcir_params* params, sqcir_state* out,
                                            int* feasible);
SQCIR_API sqcir_status sqcir_endemic_numeric(const sqcir_params* params,
                                             const sqcir_state* guess, sqcir_state* out,
                                             double* residual, int* iterations);
/* 25 entries, row-major, compartments ordered S, Q, C, I, R. */
SQCIR_API sqcir_status sqcir_jacobian(const sqcir_state* state, const sqcir_params* params,
                                      double* out25);
SQCIR_API sqcir_status sqcir_eigenvalues_at_mfe(const sqcir_params* params, double* out5);
SQCIR_API sqcir_status sqcir_classify_stability(const sqcir_params* params,
                                                sqcir_stability* out);
SQCIR_API sqcir_status sqcir_critical_thresholds(const sqcir_params* params,
                                                 sqcir_thresholds* out);
SQCIR_API sqcir_status sqcir_sensitivity_indices(const sqcir_params* params,
                                                 sqcir_sensitivity* out);
/* `e_rel` is left untouched and SQCIR_E_UNDEFINED returned when `predicted`
 * is all zero; `mae` is still written. */
SQCIR_API sqcir_status sqcir_error_metrics(const double* observed, const double* predicted,
                                           size_t n, double* e_rel, double* mae);

/* ---- simulation ------------------------------------------------------- */

/* Integrates the configured system (networked when the config has a network
 * block), with mob modulation when it has a mob block. */
SQCIR_API sqcir_status sqcir_simulate(const sqcir_config* cfg, sqcir_trajectory** out);
SQCIR_API void sqcir_trajectory_free(sqcir_trajectory* traj);
SQCIR_API size_t sqcir_trajectory_length(const sqcir_trajectory* traj);
SQCIR_API size_t sqcir_trajectory_regions(const sqcir_trajectory* traj);
SQCIR_API sqcir_status sqcir_trajectory_point(const sqcir_trajectory* traj, size_t index,
                                              size_t region, double* t, sqcir_state* state,
                                              double* epsilon);
SQCIR_API sqcir_status sqcir_trajectory_to_csv(const sqcir_trajectory* traj, char** out);

/* ---- commands producing reports ---------------------------------------- */

SQCIR_API sqcir_status sqcir_analyze_json(const sqcir_config* cfg, char** out);
/* `param` is a spelled-out parameter name (lambda, alpha, epsilon, ...). */
SQCIR_API sqcir_status sqcir_sweep_csv(const sqcir_config* cfg, const char* param, double from,
                                       double to, int steps, char** out);
/* `seed` may be NULL to keep the configured mob seed. `runs_csv` may be NULL. */
SQCIR_API sqcir_status sqcir_mc_json(const sqcir_config* cfg, size_t runs, const uint64_t* seed,
                                     char** report_json, char** runs_csv);
/* `free_list`: comma-separated names, NULL or "" for the configured default. */
SQCIR_API sqcir_status sqcir_fit_json(const sqcir_config* cfg, const sqcir_series* observed,
                                      const char* free_list, const uint64_t* seed, char** out);

/* ---- observation series ------------------------------------------------ */

SQCIR_API sqcir_status sqcir_series_load(const char* path, sqcir_series** out);
SQCIR_API sqcir_status sqcir_series_parse(const char* csv_text, sqcir_series** out);
/* n_points <= 0 selects the default: one point per day up to integrator.tf. */
SQCIR_API sqcir_status sqcir_gen_data(const sqcir_config* cfg, int n_points, double noise_sd,
                                      uint64_t seed, sqcir_series** out);
SQCIR_API void sqcir_series_free(sqcir_series* series);
SQCIR_API size_t sqcir_series_length(const sqcir_series* series);
SQCIR_API sqcir_status sqcir_series_point(const sqcir_series* series, size_t index, double* t,
                                          double* cumulative);
SQCIR_API sqcir_status sqcir_series_to_csv(const sqcir_series* series, char** out);

#ifdef __cplusplus
}
#endif

#endif /* SQCIR_SQCIR_H */
