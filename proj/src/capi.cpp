#include "huberpl.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <new>
#include <stdexcept>
#include <string>

#include "amp_engine.hpp"
#include "contamination.hpp"
#include "errors.hpp"
#include "lfse_minimax.hpp"
#include "scalar_huber.hpp"
#include "state_evolution.hpp"

using namespace huberpl;

namespace {

thread_local std::string g_last_error;

hpl_status fail(hpl_status s, const char* what) {
  g_last_error = what ? what : "";
  return s;
}

/// Run a callable, translating C++ failures to status codes.
template <typename F>
hpl_status guarded(F&& f) {
  try {
    f();
    return HPL_OK;
  } catch (const std::invalid_argument& e) {
    return fail(HPL_ERR_INVALID, e.what());
  } catch (const std::domain_error& e) {
    return fail(HPL_ERR_INVALID, e.what());
  } catch (const NoSolutionError& e) {
    return fail(HPL_ERR_NO_SOLUTION, e.what());
  } catch (const SingularSystemError& e) {
    return fail(HPL_ERR_SINGULAR, e.what());
  } catch (const SlopeInfeasibleError& e) {
    return fail(HPL_ERR_NO_SOLUTION, e.what());
  } catch (const BracketError& e) {
    return fail(HPL_ERR_NUMERIC, e.what());
  } catch (const NumericError& e) {
    return fail(HPL_ERR_NUMERIC, e.what());
  } catch (const std::bad_alloc&) {
    return fail(HPL_ERR_NUMERIC, "out of memory");
  } catch (const std::exception& e) {
    return fail(HPL_ERR_NUMERIC, e.what());
  }
}

Contamination to_core(const hpl_noise& nz) {
  Contamination c;
  c.epsilon = nz.epsilon;
  c.mu = nz.mu;
  c.sigma_base = nz.sigma_base;
  switch (nz.kind) {
    case HPL_NOISE_NONE: c.kind = NoiseKind::None; break;
    case HPL_NOISE_TWO_POINT: c.kind = NoiseKind::SymmetricTwoPoint; break;
    case HPL_NOISE_POINT_MASS: c.kind = NoiseKind::PointMass; break;
    case HPL_NOISE_AT_INFINITY: c.kind = NoiseKind::AtInfinity; break;
    default: throw std::invalid_argument("unknown noise kind");
  }
  c.validate();
  return c;
}

Contamination need_noise(const hpl_noise* nz) {
  if (!nz) throw std::invalid_argument("noise pointer is null");
  return to_core(*nz);
}

template <typename T>
T* need(T* p, const char* name) {
  if (!p) throw std::invalid_argument(std::string(name) + " pointer is null");
  return p;
}

SEConfig se_config_to_core(const hpl_se_config& c) {
  SEConfig cfg;
  cfg.m = c.m;
  cfg.mode = c.floating ? TuningMode::FloatingKappa : TuningMode::FixedLambda;
  cfg.tuning = c.tuning;
  cfg.noise = to_core(c.noise);
  cfg.tau0_sq = c.tau0_sq;
  if (c.tol > 0.0) cfg.tol = c.tol;
  if (c.max_iter > 0) cfg.max_iter = int(c.max_iter);
  return cfg;
}

}  // namespace

struct hpl_dataset {
  Dataset ds;
};

extern "C" {

const char* hpl_status_str(hpl_status s) {
  switch (s) {
    case HPL_OK: return "ok";
    case HPL_ERR_INVALID: return "invalid argument";
    case HPL_ERR_NUMERIC: return "numerical failure";
    case HPL_ERR_NO_SOLUTION: return "no solution";
    case HPL_ERR_DIVERGED: return "diverged";
    case HPL_ERR_SINGULAR: return "singular system";
    case HPL_ERR_IO: return "i/o failure";
  }
  return "unknown status";
}

const char* hpl_last_error(void) { return g_last_error.c_str(); }

hpl_noise hpl_noise_gaussian(void) { return {0.0, HPL_NOISE_NONE, 0.0, 1.0}; }
hpl_noise hpl_noise_two_point(double epsilon, double mu) {
  return {epsilon, HPL_NOISE_TWO_POINT, mu, 1.0};
}
hpl_noise hpl_noise_point_mass(double epsilon, double mu) {
  return {epsilon, HPL_NOISE_POINT_MASS, mu, 1.0};
}
hpl_noise hpl_noise_at_infinity(double epsilon) {
  return {epsilon, HPL_NOISE_AT_INFINITY, 0.0, 1.0};
}

double hpl_huber_rho(double z, double lambda) { return huber_rho(z, lambda); }
double hpl_huber_psi(double z, double lambda) { return huber_psi(z, lambda); }
double hpl_huber_psi_prime(double z, double lambda) { return huber_psi_prime(z, lambda); }
double hpl_reg_psi(double z, double lambda, double r) { return reg_psi(z, lambda, r); }
double hpl_reg_psi_prime(double z, double lambda, double r) {
  return reg_psi_prime(z, lambda, r);
}
double hpl_a_gauss(double kappa) { return a_gauss(kappa); }
double hpl_b_gauss(double kappa) { return b_gauss(kappa); }
double hpl_a_bar(double kappa, double epsilon) { return a_bar(kappa, epsilon); }
double hpl_b_bar(double kappa, double epsilon) { return b_bar(kappa, epsilon); }
double hpl_v_bar(double kappa, double epsilon) { return v_bar(kappa, epsilon); }
double hpl_j_info(double kappa, double epsilon) { return j_info(kappa, epsilon); }

hpl_status hpl_classical_minimax(double epsilon, hpl_classical* out) {
  return guarded([&] {
    need(out, "out");
    ClassicalMinimax cm = classical_minimax(epsilon);
    *out = {cm.epsilon, cm.kappa_star, cm.i_star, cm.v_star};
  });
}

hpl_status hpl_eff_slope(double tau_sq, double r, double lambda,
                         const hpl_noise* noise, double* out) {
  return guarded([&] {
    *need(out, "out") = eff_slope(tau_sq, r, lambda, need_noise(noise));
  });
}

hpl_status hpl_variance_map(double tau_sq, double r, double lambda,
                            const hpl_noise* noise, double* out) {
  return guarded([&] {
    *need(out, "out") = variance_map(tau_sq, r, lambda, need_noise(noise));
  });
}

hpl_status hpl_solve_r(double tau_sq, double m, double lambda,
                       const hpl_noise* noise, double* out) {
  return guarded([&] {
    auto r = solve_r(tau_sq, m, lambda, need_noise(noise));
    if (!r) throw NoSolutionError("slope equation has no root");
    *need(out, "out") = *r;
  });
}

hpl_status hpl_se_t_map(double tau_sq, const hpl_se_config* cfg, double* out) {
  return guarded([&] {
    *need(out, "out") = t_map(tau_sq, se_config_to_core(*need(cfg, "cfg")));
  });
}

hpl_status hpl_se_fixed_point(const hpl_se_config* cfg, hpl_se_result* out) {
  return guarded([&] {
    SEFixedPoint fp = fixed_point(se_config_to_core(*need(cfg, "cfg")));
    hpl_se_result r;
    switch (fp.status) {
      case SEStatus::Converged: r.status = HPL_SE_CONVERGED; break;
      case SEStatus::Diverged: r.status = HPL_SE_DIVERGED; break;
      case SEStatus::MaxIter: r.status = HPL_SE_MAX_ITER; break;
      case SEStatus::NoSolution: r.status = HPL_SE_NO_SOLUTION; break;
    }
    r.tau_sq = fp.tau_sq;
    r.r = fp.r;
    r.avar = fp.avar;
    r.iterations = fp.iterations;
    *need(out, "out") = r;
  });
}

hpl_status hpl_calibrate_lambda(double m, double kappa, const hpl_noise* noise,
                                double* lambda_out) {
  return guarded([&] {
    auto v = calibrate_lambda_from_kappa(m, kappa, need_noise(noise));
    if (!v) throw NoSolutionError("calibration diverges at this kappa");
    *need(lambda_out, "lambda_out") = *v;
  });
}

hpl_status hpl_calibrate_kappa(double m, double lambda, const hpl_noise* noise,
                               double* kappa_out) {
  return guarded([&] {
    auto v = calibrate_kappa_from_lambda(m, lambda, need_noise(noise));
    if (!v) throw NoSolutionError("lambda is not attained by any kappa");
    *need(kappa_out, "kappa_out") = *v;
  });
}

hpl_status hpl_solve_rbarbar(double m, double epsilon, double kappa, double* out) {
  return guarded([&] { *need(out, "out") = solve_rbarbar(m, epsilon, kappa); });
}

hpl_status hpl_lfse_t(double tau_sq, double m, double epsilon, double kappa,
                      double* out) {
  return guarded([&] { *need(out, "out") = lfse_t(tau_sq, m, epsilon, kappa); });
}

hpl_status hpl_lfse_fixed_point(double m, double epsilon, double kappa,
                                double* tau_sq_out) {
  return guarded([&] {
    *need(tau_sq_out, "tau_sq_out") = lfse_fixed_point(m, epsilon, kappa);
  });
}

hpl_status hpl_kappa_underline(double kappa_bb, double m, double epsilon,
                               double* out) {
  return guarded([&] { *need(out, "out") = kappa_underline(kappa_bb, m, epsilon); });
}

hpl_status hpl_lambda_bar(double m, double kappa, double epsilon, double* out) {
  return guarded([&] { *need(out, "out") = lambda_bar(m, kappa, epsilon); });
}

hpl_status hpl_kappa_plus(double m, double epsilon, double* out) {
  return guarded([&] { *need(out, "out") = kappa_plus(m, epsilon); });
}

hpl_status hpl_minimax(double m, double epsilon, hpl_minimax_solution* out) {
  return guarded([&] {
    MinimaxSolution s = minimax(m, epsilon);
    *need(out, "out") = {s.epsilon, s.m, s.kappa_underline_star, s.lambda_star,
                         s.v_star, s.breakdown ? 1 : 0};
  });
}

hpl_status hpl_breakdown_epsilon(double m, double* out) {
  return guarded([&] { *need(out, "out") = breakdown_epsilon(m); });
}

hpl_status hpl_suboptimality_ratio(double m, double epsilon, double* out) {
  return guarded([&] { *need(out, "out") = suboptimality_ratio(m, epsilon); });
}

hpl_status hpl_critical_curve(double eps_lo, double eps_hi, size_t n,
                              double* eps_out, double* inv_m_out) {
  return guarded([&] {
    need(eps_out, "eps_out");
    need(inv_m_out, "inv_m_out");
    auto curve = critical_curve(eps_lo, eps_hi, n);
    for (size_t i = 0; i < curve.size(); ++i) {
      eps_out[i] = curve[i].first;
      inv_m_out[i] = curve[i].second;
    }
  });
}

hpl_status hpl_dataset_generate(long n, long p, const hpl_noise* noise,
                                uint64_t seed, hpl_dataset** out) {
  return guarded([&] {
    need(out, "out");
    auto* h = new hpl_dataset{gen_dataset(n, p, need_noise(noise), seed)};
    *out = h;
  });
}

hpl_status hpl_dataset_read_csv(const char* path, hpl_dataset** out) {
  hpl_status s = guarded([&] {
    need(out, "out");
    *out = new hpl_dataset{read_dataset_csv(need(path, "path"))};
  });
  return s == HPL_ERR_NUMERIC ? HPL_ERR_IO : s;
}

hpl_status hpl_dataset_write_csv(const hpl_dataset* ds, const char* path) {
  hpl_status s = guarded([&] {
    write_dataset_csv(need(ds, "ds")->ds, need(path, "path"));
  });
  return s == HPL_ERR_NUMERIC ? HPL_ERR_IO : s;
}

void hpl_dataset_free(hpl_dataset* ds) { delete ds; }
long hpl_dataset_n(const hpl_dataset* ds) { return ds ? ds->ds.n() : 0; }
long hpl_dataset_p(const hpl_dataset* ds) { return ds ? ds->ds.p() : 0; }

hpl_status hpl_fit(const hpl_dataset* ds, double lambda, hpl_solver solver,
                   long max_iter, double tol, double* theta_out,
                   hpl_fit_info* info) {
  return guarded([&] {
    const Dataset& data = need(ds, "ds")->ds;
    need(theta_out, "theta_out");
    Eigen::VectorXd theta;
    hpl_fit_info fi{};
    if (solver == HPL_SOLVER_AMP) {
      AMPResult r = amp_fit(data, lambda, max_iter > 0 ? int(max_iter) : 1000,
                            tol > 0.0 ? tol : 1e-9);
      theta = r.theta;
      fi.iterations = r.iterations;
      fi.converged = r.converged ? 1 : 0;
      fi.r = r.r;
      fi.objective = huber_objective(data, theta, lambda);
    } else if (solver == HPL_SOLVER_IRLS) {
      IRLSResult r = irls_fit(data, lambda, max_iter > 0 ? int(max_iter) : 500,
                              tol > 0.0 ? tol : 1e-10);
      theta = r.theta;
      fi.iterations = r.iterations;
      fi.converged = r.converged ? 1 : 0;
      fi.objective = r.objective;
    } else {
      throw std::invalid_argument("unknown solver");
    }
    fi.mse = (theta - data.theta0).squaredNorm() / double(data.p());
    for (long j = 0; j < data.p(); ++j) theta_out[j] = theta[j];
    if (info) *info = fi;
  });
}

hpl_status hpl_monte_carlo(long n, long p, const hpl_noise* noise, double lambda,
                           long reps, uint64_t seed, hpl_solver solver,
                           int threads, hpl_mc_summary* out) {
  return guarded([&] {
    need(out, "out");
    MCSummary s = monte_carlo(n, p, need_noise(noise), lambda, reps, seed,
                              solver == HPL_SOLVER_AMP ? Solver::AMP : Solver::IRLS,
                              threads);
    *out = {s.reps, s.failures, s.per_coordinate_mse, s.se_estimate,
            s.mc_std_error};
  });
}

}  // extern "C"
