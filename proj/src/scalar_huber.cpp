#include "scalar_huber.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

#include "errors.hpp"
#include "normal.hpp"

namespace huberpl {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_lambda(double lambda) {
  if (std::isnan(lambda) || lambda <= 0.0)
    throw std::invalid_argument("threshold lambda must be positive");
}
void check_r(double r) {
  if (!(r > 0.0) || !std::isfinite(r))
    throw std::invalid_argument("regularization r must be positive and finite");
}
void check_eps(double eps) {
  if (!(eps >= 0.0 && eps < 1.0))
    throw std::invalid_argument("epsilon must lie in [0,1)");
}
}  // namespace

double huber_rho(double z, double lambda) {
  check_lambda(lambda);
  double az = std::fabs(z);
  if (az <= lambda) return 0.5 * z * z;
  return lambda * az - 0.5 * lambda * lambda;
}

double huber_psi(double z, double lambda) {
  check_lambda(lambda);
  return std::clamp(z, -lambda, lambda);
}

double huber_psi_prime(double z, double lambda) {
  check_lambda(lambda);
  return std::fabs(z) <= lambda ? 1.0 : 0.0;
}

double reg_psi(double z, double lambda, double r) {
  check_lambda(lambda);
  check_r(r);
  return r * huber_psi(z / (1.0 + r), lambda);
}

double reg_psi_prime(double z, double lambda, double r) {
  check_lambda(lambda);
  check_r(r);
  return (r / (1.0 + r)) * huber_psi_prime(z, lambda * (1.0 + r));
}

double a_gauss(double kappa) {
  if (std::isnan(kappa) || kappa < 0.0)
    throw std::invalid_argument("kappa must be nonnegative");
  if (std::isinf(kappa)) return 1.0;
  double tail = norm_sf(kappa);
  return (2.0 * norm_cdf(kappa) - 1.0) - 2.0 * kappa * norm_pdf(kappa) +
         2.0 * kappa * kappa * tail;
}

double b_gauss(double kappa) {
  if (std::isnan(kappa) || kappa < 0.0)
    throw std::invalid_argument("kappa must be nonnegative");
  if (std::isinf(kappa)) return 1.0;
  return 2.0 * norm_cdf(kappa) - 1.0;
}

double a_gauss_prime(double kappa) { return 4.0 * kappa * norm_sf(kappa); }

double a_bar(double kappa, double epsilon) {
  check_eps(epsilon);
  if (std::isinf(kappa) && epsilon > 0.0) return kInf;
  return (1.0 - epsilon) * a_gauss(kappa) + epsilon * kappa * kappa;
}

double b_bar(double kappa, double epsilon) {
  check_eps(epsilon);
  return (1.0 - epsilon) * b_gauss(kappa);
}

double v_bar(double kappa, double epsilon) {
  double b = b_bar(kappa, epsilon);
  if (b <= 0.0) {
    // kappa -> 0: a_bar/b_bar^2 has the finite limit pi / (2 (1-eps)^2).
    if (kappa == 0.0) {
      double c = 1.0 - epsilon;
      return 3.14159265358979323846 / (2.0 * c * c);
    }
    throw NumericError("v_bar: vanishing slope envelope");
  }
  return a_bar(kappa, epsilon) / (b * b);
}

double j_info(double kappa, double epsilon) { return a_bar(kappa, epsilon); }

namespace {

/// Stationarity defect of v_bar: g(kappa) = a_bar - b_bar. Setting the
/// derivative of a_bar/b_bar^2 to zero reduces to exactly this condition
/// (Huber's equation); g crosses zero once, from below, at the minimizer.
double stationarity(double kappa, double eps) {
  return a_bar(kappa, eps) - b_bar(kappa, eps);
}

}  // namespace

ClassicalMinimax classical_minimax(double epsilon) {
  check_eps(epsilon);
  if (epsilon == 0.0) return {0.0, kInf, 1.0, 1.0, true};

  // Coarse log-spaced scan to bracket the minimizer and verify unimodality.
  double lo = 1e-4, hi = 10.0;
  int argmin = -1;
  std::vector<double> grid, vals;
  for (int widen = 0; widen < 8; ++widen) {
    const int N = 600;
    grid.resize(N);
    vals.resize(N);
    double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < N; ++i) {
      grid[i] = std::exp(llo + (lhi - llo) * i / (N - 1));
      vals[i] = v_bar(grid[i], epsilon);
    }
    argmin = int(std::min_element(vals.begin(), vals.end()) - vals.begin());
    if (argmin > 0 && argmin < N - 1) break;
    if (argmin == 0) lo *= 1e-3;
    else hi *= 4.0;
    argmin = -1;
  }
  if (argmin < 0)
    throw BracketError("classical_minimax: could not bracket the minimizer");
  // Unimodality check: the scan must descend then ascend exactly once,
  // ignoring float-level jitter on the flat bottom of the valley.
  int flips = 0, dir = 0;
  for (size_t i = 1; i < vals.size(); ++i) {
    double diff = vals[i] - vals[i - 1];
    if (std::fabs(diff) <= 1e-5 * std::fabs(vals[i])) continue;
    int d = diff > 0.0 ? 1 : -1;
    if (dir != 0 && d != dir) ++flips;
    dir = d;
  }
  if (flips > 1)
    throw NumericError("classical_minimax: scan is not unimodal");

  // Golden section on the bracketing triple.
  double a = grid[argmin - 1], b = grid[argmin + 1];
  const double gr = 0.6180339887498949;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = v_bar(x1, epsilon), f2 = v_bar(x2, epsilon);
  while (b - a > 1e-12 * (1.0 + a)) {
    if (f1 < f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - gr * (b - a); f1 = v_bar(x1, epsilon);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + gr * (b - a); f2 = v_bar(x2, epsilon);
    }
  }
  double kappa = 0.5 * (a + b);

  // Polish using the exact first-order condition a_bar = b_bar, which is
  // monotone through the minimizer (negative left of it, positive right).
  double pl = kappa * 0.9, ph = kappa * 1.1;
  if (stationarity(pl, epsilon) < 0.0 && stationarity(ph, epsilon) > 0.0) {
    for (int it = 0; it < 200 && ph - pl > 1e-16 * ph; ++it) {
      double mid = 0.5 * (pl + ph);
      (stationarity(mid, epsilon) < 0.0 ? pl : ph) = mid;
    }
    kappa = 0.5 * (pl + ph);
  }

  double i_star = j_info(kappa, epsilon);
  double v_star = v_bar(kappa, epsilon);
  if (std::fabs(v_star * i_star - 1.0) > 1e-6)
    throw NumericError("classical_minimax: duality check v* i* = 1 failed");
  return {epsilon, kappa, i_star, v_star, false};
}

}  // namespace huberpl
