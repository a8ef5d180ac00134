#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "contamination.hpp"

namespace huberpl {

enum class TuningMode {
  FixedLambda,   ///< threshold held at a constant lambda
  FloatingKappa  ///< lambda_t = kappa * sqrt(sigma_base^2 + tau_t^2)
};

struct SEConfig {
  double m = 2.0;  ///< observations per parameter, > 1
  TuningMode mode = TuningMode::FixedLambda;
  double tuning = 1.0;  ///< lambda or kappa; lambda may be +inf
  Contamination noise;
  double tau0_sq = 0.0;
  double tol = 1e-10;
  int max_iter = 10000;
  double divergence_ceiling = 1e12;
};

enum class SEStatus { Converged, Diverged, MaxIter, NoSolution };

struct SEFixedPoint {
  SEStatus status = SEStatus::MaxIter;
  double tau_sq = 0.0;  ///< +inf when diverged
  double r = 0.0;       ///< regularization at the fixed point
  double avar = 0.0;    ///< m * tau_sq
  int iterations = 0;
  std::vector<std::pair<double, double>> trace;  ///< (tau_sq_t, r_t)
};

/// B(tau^2, r) = E Psi'(W + tau Z; lambda, r); the effective score slope.
double eff_slope(double tau_sq, double r, double lambda, const Contamination& noise);

/// A(tau^2, r) = E Psi(W + tau Z; lambda, r)^2.
double variance_map(double tau_sq, double r, double lambda, const Contamination& noise);

/// Smallest r > 0 with eff_slope(tau_sq, r) = 1/m; nullopt when the
/// equation has no root (possible only under the extremal law).
std::optional<double> solve_r(double tau_sq, double m, double lambda,
                              const Contamination& noise);

/// One step of state evolution: T(tau^2) = m * A(tau^2, r(tau^2)).
/// Throws NoSolutionError when the slope equation has no root.
double t_map(double tau_sq, const SEConfig& cfg);

/// Iterate T to a fixed point (Picard, with divergence detection and a
/// bisection fallback if the iterates oscillate).
SEFixedPoint fixed_point(const SEConfig& cfg);

/// Floating-kappa fixed point mapped back to a fixed threshold:
/// lambda = kappa * sqrt(sigma_base^2 + tau_inf^2). nullopt on divergence.
std::optional<double> calibrate_lambda_from_kappa(double m, double kappa,
                                                  const Contamination& noise);

/// Inverse calibration: the kappa whose floating fixed point reproduces
/// the given lambda. nullopt when lambda is not attained.
std::optional<double> calibrate_kappa_from_lambda(double m, double lambda,
                                                  const Contamination& noise);

}  // namespace huberpl
