/* SPDX-License-Identifier: Apache-2.0 */
#ifndef PSTAB_H
#define PSTAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PSTAB_API __declspec(dllexport)
#else
#define PSTAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pstab_status {
    PSTAB_OK = 0,
    PSTAB_ERR_INVALID_ARGUMENT = 1, /* bad parameter or config value */
    PSTAB_ERR_NUMERICAL = 2,        /* singular solve, failed search, non-finite result */
    PSTAB_ERR_IO = 3,
    PSTAB_ERR_RANGE = 4,            /* index or buffer capacity */
    PSTAB_ERR_INTERNAL = 5
} pstab_status;

/* Message for the last failing call on this thread ("" if none). */
PSTAB_API const char* pstab_last_error(void);
PSTAB_API const char* pstab_version(void);
/* Calibration file baked in at build time. */
PSTAB_API const char* pstab_default_calibration_path(void);

/* ---- linear operator for one Fourier mode ---- */

typedef struct pstab_operator pstab_operator;

PSTAB_API pstab_status pstab_operator_create(double nu, int k, int n_intervals, int diffusion_only,
                                             pstab_operator** out);
PSTAB_API void pstab_operator_destroy(pstab_operator* op);
PSTAB_API int pstab_operator_dim(const pstab_operator* op);

/* Eigenvalues sorted by real part; capacity must be >= dim. */
PSTAB_API pstab_status pstab_operator_spectrum(const pstab_operator* op, double* re, double* im,
                                               int capacity);

PSTAB_API pstab_status pstab_operator_sigma_min(const pstab_operator* op, double mu, double* out);

/* inf over mu of sigma_min on the default search range. */
PSTAB_API pstab_status pstab_operator_psi(const pstab_operator* op, double* psi, double* mu_star);

/* ||exp(-t M)|| for increasing times starting at 0. */
PSTAB_API pstab_status pstab_operator_semigroup(const pstab_operator* op, const double* times,
                                                int n, double* norms);

typedef struct pstab_resolvent_report pstab_resolvent_report;

PSTAB_API pstab_status pstab_resolvent_sweep(const pstab_operator* op, double mu_min,
                                             double mu_max, int n_mu,
                                             pstab_resolvent_report** out);
PSTAB_API void pstab_resolvent_report_destroy(pstab_resolvent_report* r);
PSTAB_API int pstab_resolvent_report_size(const pstab_resolvent_report* r);
PSTAB_API pstab_status pstab_resolvent_report_row(const pstab_resolvent_report* r, int i,
                                                  double* mu, double* sigma_min,
                                                  double* resolvent_norm, double* scaled_norm,
                                                  int* flagged);

/* ---- fits and envelopes ---- */

PSTAB_API double pstab_gearhart_pruss_bound(double t, double psi);

typedef struct pstab_decay_fit {
    double c_fit;
    double log_prefactor;
    double t_lo;
    double t_hi;
    double residual;
    int n_samples;
} pstab_decay_fit;

/* Default window: first drop below 0.5 to the last sample above 1e-10. */
PSTAB_API pstab_status pstab_fit_decay(const double* times, const double* norms, int n,
                                       pstab_decay_fit* out);
PSTAB_API pstab_status pstab_loglog_slope(const double* x, const double* y, int n, double* slope);

/* ---- calibration constants ---- */

typedef struct pstab_calibration {
    double c_resolvent;
    double c_hardy;
    double c_p;
    double c_u;
} pstab_calibration;

PSTAB_API pstab_status pstab_calibration_load(const char* path, pstab_calibration* out);

/* ---- critical-layer lemma suite ---- */

typedef struct pstab_lemma_config {
    uint64_t seed;
    int n_draws;
    int n_sub;
    const int* k_values;
    int n_k;
    double corpus_y2; /* <= 0 draws the layer per field */
    const double* y2_values; /* NULL selects the default sweep */
    int n_y2;
    const double* delta_values;
    int n_delta;
    int n_random_geoms;
    pstab_calibration calibration;
    int inject_violation;
} pstab_lemma_config;

/* Defaults; k_values, y2_values and delta_values are left NULL. */
PSTAB_API void pstab_lemma_config_default(pstab_lemma_config* cfg);

typedef struct pstab_lemma_report pstab_lemma_report;

PSTAB_API pstab_status pstab_lemma_suite_run(const pstab_lemma_config* cfg,
                                             pstab_lemma_report** out);
PSTAB_API void pstab_lemma_report_destroy(pstab_lemma_report* r);
PSTAB_API int pstab_lemma_report_line_count(const pstab_lemma_report* r);
/* JSON object; valid until the report is destroyed. */
PSTAB_API const char* pstab_lemma_report_line(const pstab_lemma_report* r, int i);
PSTAB_API int pstab_lemma_report_checks(const pstab_lemma_report* r);
PSTAB_API int pstab_lemma_report_failures(const pstab_lemma_report* r);

/* ---- nonlinear simulation ---- */

typedef enum pstab_shape { PSTAB_SHAPE_SINCOS = 0, PSTAB_SHAPE_RANDOM = 1 } pstab_shape;

typedef struct pstab_dns_config {
    double nu;
    int x_modes;
    int n_intervals;
    double dt;     /* 0: automatic */
    double t_end;  /* 0: 20 / sqrt(nu) */
    double amplitude;
    pstab_shape shape;
    uint64_t seed;
    double c_prime_factor;
    double c_fit;  /* <= 0: computed from the linear k = 1 semigroup */
    double output_interval; /* 0: t_end / 200 */
    int linearized;
    double max_amplification;
    double end_fraction;
} pstab_dns_config;

PSTAB_API void pstab_dns_config_default(pstab_dns_config* cfg);

typedef struct pstab_dns_summary {
    double dt;
    long n_steps;
    double c_prime;
    double max_amplification;
    double end_fraction;
    int blew_up;
    int stable;
    double decay_rate; /* NaN when no fit window exists */
} pstab_dns_summary;

typedef struct pstab_dns_result pstab_dns_result;

PSTAB_API pstab_status pstab_dns_run(const pstab_dns_config* cfg, pstab_dns_result** out);
PSTAB_API void pstab_dns_result_destroy(pstab_dns_result* r);
PSTAB_API int pstab_dns_result_samples(const pstab_dns_result* r);
PSTAB_API pstab_status pstab_dns_result_sample(const pstab_dns_result* r, int i, double* t,
                                               double* nonzero_norm, double* mean_norm,
                                               double* uinf_ratio, double* xnorm_sq);
PSTAB_API pstab_status pstab_dns_result_summary(const pstab_dns_result* r,
                                                pstab_dns_summary* out);

/* Linear k = 1 decay rate used for the space-time weight. */
PSTAB_API pstab_status pstab_linear_decay_rate(double nu, int n_intervals, double* out);

typedef enum pstab_sweep_status {
    PSTAB_SWEEP_BOUNDARY = 0,
    PSTAB_SWEEP_STABLE_TO_CAP = 1,
    PSTAB_SWEEP_BRACKET_INVALID = 2
} pstab_sweep_status;

typedef struct pstab_threshold_row {
    double nu;
    double amplitude;
    double gamma_scaled_amp;
    int stable;
    double max_amplification;
    double end_fraction;
} pstab_threshold_row;

typedef struct pstab_threshold_table pstab_threshold_table;

/* Bisection for one nu; the bracket is given in units of nu^{3/4}. */
PSTAB_API pstab_status pstab_threshold_run(const pstab_dns_config* base, double nu,
                                           double scaled_lo, double scaled_hi, int iterations,
                                           pstab_threshold_table** out);
PSTAB_API void pstab_threshold_table_destroy(pstab_threshold_table* t);
PSTAB_API int pstab_threshold_table_size(const pstab_threshold_table* t);
PSTAB_API pstab_status pstab_threshold_table_row(const pstab_threshold_table* t, int i,
                                                 pstab_threshold_row* out);
PSTAB_API pstab_status pstab_threshold_table_outcome(const pstab_threshold_table* t,
                                                     pstab_sweep_status* status, double* a_crit);

#ifdef __cplusplus
}
#endif

#endif
