#ifndef HUBERPL_H
#define HUBERPL_H

/*
 * huberpl -- Huber (M)-estimation of regression in the proportional
 * regime n/p -> m: state evolution, minimax tuning over gross-error
 * contamination, the variance-breakdown boundary, and a finite-n
 * AMP/IRLS Monte Carlo harness.
 *
 * Plain C interface over the C++ core. All functions return hpl_status;
 * scalar math helpers that are total on their domain return the value
 * directly. On failure, hpl_last_error() carries a short diagnostic.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HPL_API __declspec(dllexport)
#else
#define HPL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hpl_status {
  HPL_OK = 0,
  HPL_ERR_INVALID = 2,     /* bad argument / precondition violated */
  HPL_ERR_NUMERIC = 3,     /* solver failure (bracket, convergence check) */
  HPL_ERR_NO_SOLUTION = 4, /* the defining equation has no root */
  HPL_ERR_DIVERGED = 5,    /* state evolution ran off to infinity */
  HPL_ERR_SINGULAR = 6,    /* rank-deficient linear system */
  HPL_ERR_IO = 7           /* file read/write failure */
} hpl_status;

HPL_API const char* hpl_status_str(hpl_status s);
/* Thread-local detail message for the most recent failure in this thread. */
HPL_API const char* hpl_last_error(void);

/* ---- contaminated-normal error law F = (1-eps)*Phi + eps*H ---- */

typedef enum hpl_noise_kind {
  HPL_NOISE_NONE = 0,        /* no contamination; epsilon must be 0 */
  HPL_NOISE_TWO_POINT = 1,   /* H places mass 1/2 at each of +-mu */
  HPL_NOISE_POINT_MASS = 2,  /* H = delta_mu */
  HPL_NOISE_AT_INFINITY = 3  /* improper extremal law with mass at +-infinity */
} hpl_noise_kind;

typedef struct hpl_noise {
  double epsilon;       /* contamination fraction, in [0,1) */
  hpl_noise_kind kind;
  double mu;            /* contamination location (unused for NONE/AT_INFINITY) */
  double sigma_base;    /* scale of the nominal Gaussian component; usually 1 */
} hpl_noise;

HPL_API hpl_noise hpl_noise_gaussian(void);
HPL_API hpl_noise hpl_noise_two_point(double epsilon, double mu);
HPL_API hpl_noise hpl_noise_point_mass(double epsilon, double mu);
HPL_API hpl_noise hpl_noise_at_infinity(double epsilon);

/* ---- scalar Huber family, envelopes, classical minimax ---- */

HPL_API double hpl_huber_rho(double z, double lambda);
HPL_API double hpl_huber_psi(double z, double lambda);
HPL_API double hpl_huber_psi_prime(double z, double lambda);
HPL_API double hpl_reg_psi(double z, double lambda, double r);
HPL_API double hpl_reg_psi_prime(double z, double lambda, double r);
HPL_API double hpl_a_gauss(double kappa);
HPL_API double hpl_b_gauss(double kappa);
HPL_API double hpl_a_bar(double kappa, double epsilon);
HPL_API double hpl_b_bar(double kappa, double epsilon);
HPL_API double hpl_v_bar(double kappa, double epsilon);
HPL_API double hpl_j_info(double kappa, double epsilon);

typedef struct hpl_classical {
  double epsilon;
  double kappa_star;   /* +inf at epsilon = 0 (least-squares limit) */
  double i_star;       /* minimal Fisher information, in (0,1] */
  double v_star;       /* 1/i_star */
} hpl_classical;

HPL_API hpl_status hpl_classical_minimax(double epsilon, hpl_classical* out);

/* ---- state evolution ---- */

typedef struct hpl_se_config {
  double m;          /* observations per parameter, > 1 */
  int floating;      /* 0: fixed lambda; 1: floating kappa (lambda_t = kappa*sigma_t) */
  double tuning;     /* lambda or kappa depending on `floating`; may be +inf */
  hpl_noise noise;
  double tau0_sq;    /* initial condition */
  double tol;        /* <= 0 selects the default 1e-10 */
  long max_iter;     /* <= 0 selects the default 10000 */
} hpl_se_config;

typedef enum hpl_se_status {
  HPL_SE_CONVERGED = 0,
  HPL_SE_DIVERGED = 1,
  HPL_SE_MAX_ITER = 2,
  HPL_SE_NO_SOLUTION = 3
} hpl_se_status;

typedef struct hpl_se_result {
  hpl_se_status status;
  double tau_sq;     /* fixed point; +inf when diverged */
  double r;          /* effective regularization at the fixed point */
  double avar;       /* m * tau_sq */
  long iterations;
} hpl_se_result;

HPL_API hpl_status hpl_eff_slope(double tau_sq, double r, double lambda,
                                 const hpl_noise* noise, double* out);
HPL_API hpl_status hpl_variance_map(double tau_sq, double r, double lambda,
                                    const hpl_noise* noise, double* out);
HPL_API hpl_status hpl_solve_r(double tau_sq, double m, double lambda,
                               const hpl_noise* noise, double* out);
HPL_API hpl_status hpl_se_t_map(double tau_sq, const hpl_se_config* cfg, double* out);
HPL_API hpl_status hpl_se_fixed_point(const hpl_se_config* cfg, hpl_se_result* out);
HPL_API hpl_status hpl_calibrate_lambda(double m, double kappa,
                                        const hpl_noise* noise, double* lambda_out);
HPL_API hpl_status hpl_calibrate_kappa(double m, double lambda,
                                       const hpl_noise* noise, double* kappa_out);

/* ---- least-favorable SE and the minimax surface ---- */

HPL_API hpl_status hpl_solve_rbarbar(double m, double epsilon, double kappa, double* out);
HPL_API hpl_status hpl_lfse_t(double tau_sq, double m, double epsilon, double kappa,
                              double* out);
/* +inf when the LFSE map has slope >= 1 (no fixed point). */
HPL_API hpl_status hpl_lfse_fixed_point(double m, double epsilon, double kappa,
                                        double* tau_sq_out);
HPL_API hpl_status hpl_kappa_underline(double kappa_bb, double m, double epsilon,
                                       double* out);
/* Calibration lambda_bar(kappa) under the extremal law; +inf past kappa_plus. */
HPL_API hpl_status hpl_lambda_bar(double m, double kappa, double epsilon, double* out);
HPL_API hpl_status hpl_kappa_plus(double m, double epsilon, double* out);

typedef struct hpl_minimax_solution {
  double epsilon, m;
  double kappa_underline_star; /* +inf in the least-squares limit eps = 0 */
  double lambda_star;          /* +inf at eps = 0; undefined past breakdown */
  double v_star;               /* +inf in the breakdown phase */
  int breakdown;
} hpl_minimax_solution;

HPL_API hpl_status hpl_minimax(double m, double epsilon, hpl_minimax_solution* out);
HPL_API hpl_status hpl_breakdown_epsilon(double m, double* out);
HPL_API hpl_status hpl_suboptimality_ratio(double m, double epsilon, double* out);
/* Samples the critical curve 1/m = i*(eps) at n points on [eps_lo, eps_hi]. */
HPL_API hpl_status hpl_critical_curve(double eps_lo, double eps_hi, size_t n,
                                      double* eps_out, double* inv_m_out);

/* ---- finite-n validation (synthetic data, AMP, IRLS, Monte Carlo) ---- */

typedef struct hpl_dataset hpl_dataset;

HPL_API hpl_status hpl_dataset_generate(long n, long p, const hpl_noise* noise,
                                        uint64_t seed, hpl_dataset** out);
HPL_API hpl_status hpl_dataset_read_csv(const char* path, hpl_dataset** out);
HPL_API hpl_status hpl_dataset_write_csv(const hpl_dataset* ds, const char* path);
HPL_API void hpl_dataset_free(hpl_dataset* ds);
HPL_API long hpl_dataset_n(const hpl_dataset* ds);
HPL_API long hpl_dataset_p(const hpl_dataset* ds);

typedef enum hpl_solver { HPL_SOLVER_IRLS = 0, HPL_SOLVER_AMP = 1 } hpl_solver;

typedef struct hpl_fit_info {
  long iterations;
  int converged;
  double objective;    /* Huber objective at the estimate */
  double r;            /* final AMP regularization (0 for IRLS) */
  double mse;          /* ||theta_hat - theta0||^2 / p against the generating truth */
} hpl_fit_info;

/* theta_out must have room for p doubles; max_iter/tol <= 0 select defaults. */
HPL_API hpl_status hpl_fit(const hpl_dataset* ds, double lambda, hpl_solver solver,
                           long max_iter, double tol, double* theta_out,
                           hpl_fit_info* info);

typedef struct hpl_mc_summary {
  long reps, failures;
  double per_coordinate_mse;
  double se_estimate;   /* sqrt(per_coordinate_mse) */
  double mc_std_error;  /* Monte Carlo standard error of per_coordinate_mse */
} hpl_mc_summary;

HPL_API hpl_status hpl_monte_carlo(long n, long p, const hpl_noise* noise,
                                   double lambda, long reps, uint64_t seed,
                                   hpl_solver solver, int threads,
                                   hpl_mc_summary* out);

#ifdef __cplusplus
}
#endif

#endif /* HUBERPL_H */
