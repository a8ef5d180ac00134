#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace huberpl {

/// Least-favorable state evolution (floating kappa, contamination at
/// infinity). The effective regularization rbarbar is constant in tau^2,
/// so the evolution map is exactly linear in 1 + tau^2.

/// Root of (r/(1+r)) (1-eps) (2 Phi(kappa (1+r)) - 1) = 1/m.
/// The left side is strictly increasing in r with supremum 1 - eps, so a
/// root exists iff (1-eps) > 1/m. Throws NoSolutionError otherwise.
double solve_rbarbar(double m, double epsilon, double kappa);

/// kappa_bb = kappa * (1 + rbarbar).
double kappa_bb(double m, double epsilon, double kappa);

/// One step of the least-favorable evolution: (1 + tau^2) V_bar(kappa_bb) / m.
double lfse_t(double tau_sq, double m, double epsilon, double kappa);

/// Fixed point (V/m) / (1 - V/m) with V = V_bar(kappa_bb, eps);
/// +inf when V >= m (slope at least 1).
double lfse_fixed_point(double m, double epsilon, double kappa);

/// Inverse of the kappa -> kappa_bb bijection at fixed (m, eps):
/// rbarbar(kappa_bb) = 1 / (m (1-eps) (2 Phi(kappa_bb) - 1) - 1), defined
/// only while that denominator is positive (kappa_bb below its sup).
double rbarbar_from_kappa_bb(double kappa_bb, double m, double epsilon);
double kappa_underline(double kappa_bb, double m, double epsilon);

/// Threshold calibration under the extremal law, in closed form:
/// lambda_bar(kappa) = kappa / sqrt(1 - V_bar(kappa_bb)/m); +inf at and
/// past kappa_plus.
double lambda_bar(double m, double kappa, double epsilon);

/// The kappa at which V_bar(kappa_bb(kappa), eps) = m, i.e. where the
/// least-favorable fixed point escapes to infinity.
double kappa_plus(double m, double epsilon);

struct MinimaxSolution {
  double epsilon = 0.0, m = 0.0;
  double kappa_underline_star = 0.0;  ///< +inf in the least-squares limit
  double lambda_star = 0.0;           ///< +inf at eps = 0
  double v_star = 0.0;                ///< minimax variance; +inf past breakdown
  bool breakdown = false;
  bool least_squares_limit = false;
};

/// Minimax asymptotic variance and optimal tuning at (m, eps).
MinimaxSolution minimax(double m, double epsilon);

/// Contamination level where m * i_star(eps) = 1: the variance-breakdown
/// boundary at aspect ratio m.
double breakdown_epsilon(double m);

/// K(m, eps) = (1 - 1/m) / (1 - i_star/m): price of the proportional
/// regime relative to the classical limit. Requires m i_star > 1.
double suboptimality_ratio(double m, double epsilon);

enum class PhaseQuantity { VStar, KappaStar, LambdaStar };

struct PhaseGrid {
  std::vector<double> eps;    ///< grid over contamination
  std::vector<double> inv_m;  ///< grid over 1/m
  std::vector<double> value;  ///< row-major [eps][inv_m]; +inf past breakdown
};

PhaseGrid phase_grid(PhaseQuantity q, const std::vector<double>& eps_grid,
                     const std::vector<double>& inv_m_grid);

/// The critical curve 1/m = i_star(eps) sampled at n points of [lo, hi].
std::vector<std::pair<double, double>> critical_curve(double lo, double hi, size_t n);

}  // namespace huberpl
