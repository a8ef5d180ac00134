#pragma once

#include <cmath>

namespace huberpl {

/// Huber loss with threshold lambda: quadratic on [-lambda, lambda],
/// linear continuation outside. lambda = +inf gives z^2/2 (least squares).
double huber_rho(double z, double lambda);

/// Score psi = rho': the clip of z to [-lambda, lambda].
double huber_psi(double z, double lambda);

/// psi' with the kink resolved to 1 (psi'(+-lambda) = 1).
double huber_psi_prime(double z, double lambda);

/// Regularized score Psi(z; lambda, r) = r * psi_lambda(z / (1+r)).
/// Equals (r/(1+r)) * psi_{lambda(1+r)}(z); slope bounded by r/(1+r) < 1.
double reg_psi(double z, double lambda, double r);
double reg_psi_prime(double z, double lambda, double r);

/// E psi_kappa(Z)^2 and E psi_kappa'(Z) for Z standard normal.
double a_gauss(double kappa);
double b_gauss(double kappa);
/// d a_gauss / d kappa = 4 kappa (1 - Phi(kappa)).
double a_gauss_prime(double kappa);

/// Worst-case envelopes over the eps-contamination ball (contamination
/// pushed to +-infinity, where it contributes kappa^2 to A and 0 to B).
double a_bar(double kappa, double epsilon);
double b_bar(double kappa, double epsilon);
/// Scalar asymptotic variance envelope a_bar / b_bar^2.
double v_bar(double kappa, double epsilon);
/// Fisher information of the least favorable law at clipping level kappa.
/// Coincides with a_bar identically in (kappa, epsilon).
double j_info(double kappa, double epsilon);

/// Classical (m = infinity) minimax description at contamination eps.
struct ClassicalMinimax {
  double epsilon;
  double kappa_star;  ///< minimizer of v_bar; +inf in the least-squares limit
  double i_star;      ///< minimal Fisher information j_info(kappa_star, eps)
  double v_star;      ///< min of v_bar; equals 1 / i_star
  bool least_squares_limit;  ///< true iff eps == 0
};

/// Minimize v_bar over kappa. The minimizer is characterized exactly by
/// a_bar(kappa) = b_bar(kappa); a golden-section pass locates it and a
/// bisection on that stationarity condition polishes it, so that the
/// identity v_star * i_star = 1 holds to ~1e-12.
ClassicalMinimax classical_minimax(double epsilon);

}  // namespace huberpl
