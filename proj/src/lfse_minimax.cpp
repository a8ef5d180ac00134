#include "lfse_minimax.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "errors.hpp"
#include "normal.hpp"
#include "scalar_huber.hpp"

namespace huberpl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_m(double m) {
  if (!(m > 1.0) || !std::isfinite(m))
    throw std::invalid_argument("m must be finite and exceed 1");
}
void check_eps(double eps) {
  if (!(eps >= 0.0 && eps < 1.0))
    throw std::invalid_argument("epsilon must lie in [0,1)");
}
void check_kappa(double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa))
    throw std::invalid_argument("kappa must be positive and finite");
}

}  // namespace

double solve_rbarbar(double m, double epsilon, double kappa) {
  check_m(m);
  check_eps(epsilon);
  check_kappa(kappa);
  const double target = 1.0 / m;
  if (!((1.0 - epsilon) > target))
    throw NoSolutionError("solve_rbarbar: requires (1-eps) > 1/m");
  auto lhs = [&](double r) {
    return (r / (1.0 + r)) * (1.0 - epsilon) * b_gauss(kappa * (1.0 + r));
  };
  double hi = 1.0;
  while (lhs(hi) < target) {
    hi *= 2.0;
    if (hi > 1e300) throw NumericError("solve_rbarbar: bracket expansion failed");
  }
  double lo = 0.0;
  for (int it = 0; it < 400 && hi - lo > 1e-12 * (1.0 + lo); ++it) {
    double mid = 0.5 * (lo + hi);
    (lhs(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double kappa_bb(double m, double epsilon, double kappa) {
  return kappa * (1.0 + solve_rbarbar(m, epsilon, kappa));
}

double lfse_t(double tau_sq, double m, double epsilon, double kappa) {
  if (!(tau_sq >= 0.0)) throw std::invalid_argument("tau_sq must be >= 0");
  double kbb = kappa_bb(m, epsilon, kappa);
  return (1.0 + tau_sq) * v_bar(kbb, epsilon) / m;
}

double lfse_fixed_point(double m, double epsilon, double kappa) {
  double kbb = kappa_bb(m, epsilon, kappa);
  double slope = v_bar(kbb, epsilon) / m;
  if (slope >= 1.0) return kInf;
  return slope / (1.0 - slope);
}

double rbarbar_from_kappa_bb(double kappa_bb_val, double m, double epsilon) {
  check_m(m);
  check_eps(epsilon);
  check_kappa(kappa_bb_val);
  double denom = m * (1.0 - epsilon) * b_gauss(kappa_bb_val) - 1.0;
  if (!(denom > 0.0))
    throw std::domain_error(
        "rbarbar_from_kappa_bb: kappa_bb at or below the feasibility boundary");
  return 1.0 / denom;
}

double kappa_underline(double kappa_bb_val, double m, double epsilon) {
  double r = rbarbar_from_kappa_bb(kappa_bb_val, m, epsilon);
  return kappa_bb_val / (1.0 + r);
}

double lambda_bar(double m, double kappa, double epsilon) {
  double kbb = kappa_bb(m, epsilon, kappa);
  double slope = v_bar(kbb, epsilon) / m;
  if (slope >= 1.0) return kInf;
  return kappa / std::sqrt(1.0 - slope);
}

double kappa_plus(double m, double epsilon) {
  check_m(m);
  check_eps(epsilon);
  if (!((1.0 - epsilon) > 1.0 / m))
    throw NoSolutionError("kappa_plus: requires (1-eps) > 1/m");
  auto f = [&](double kappa) {
    return v_bar(kappa_bb(m, epsilon, kappa), epsilon) - m;
  };
  double lo = 1e-8;
  if (f(lo) >= 0.0)
    throw NoSolutionError("kappa_plus: least-favorable map unstable at all kappa");
  double hi = 1.0;
  while (f(hi) < 0.0) {
    hi *= 2.0;
    if (hi > 1e12) throw NumericError("kappa_plus: bracket expansion failed");
  }
  for (int it = 0; it < 300 && hi - lo > 1e-11 * (1.0 + lo); ++it) {
    double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

MinimaxSolution minimax(double m, double epsilon) {
  check_m(m);
  check_eps(epsilon);
  MinimaxSolution out;
  out.m = m;
  out.epsilon = epsilon;
  if (epsilon == 0.0) {
    out.least_squares_limit = true;
    out.kappa_underline_star = kInf;
    out.lambda_star = kInf;
    out.v_star = m / (m - 1.0);
    return out;
  }
  ClassicalMinimax cm = classical_minimax(epsilon);
  if (!(m * cm.i_star > 1.0)) {
    out.breakdown = true;
    out.v_star = kInf;
    out.kappa_underline_star = std::numeric_limits<double>::quiet_NaN();
    out.lambda_star = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.v_star = 1.0 / (cm.i_star - 1.0 / m);
  // At the classical minimizer, a_bar = b_bar = i_star, so the inverse of
  // kappa -> kappa_bb is available in closed form there.
  out.kappa_underline_star = kappa_underline(cm.kappa_star, m, epsilon);
  double v_small = cm.v_star;  // classical minimax variance 1/i_star
  out.lambda_star = out.kappa_underline_star / std::sqrt(1.0 - v_small / m);
  return out;
}

double breakdown_epsilon(double m) {
  check_m(m);
  const double target = 1.0 / m;
  auto istar = [](double eps) { return classical_minimax(eps).i_star; };
  double lo = 1e-6, hi = 0.5;
  // i_star decreases from ~1 to 0; expand hi toward 1 until it undershoots.
  while (istar(hi) > target) {
    hi = 0.5 * (1.0 + hi);
    if (hi > 1.0 - 1e-9)
      throw NumericError("breakdown_epsilon: boundary out of range");
  }
  if (istar(lo) <= target)
    throw NumericError("breakdown_epsilon: boundary below epsilon = 1e-6");
  while (hi - lo > 1e-7) {
    double mid = 0.5 * (lo + hi);
    (istar(mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double suboptimality_ratio(double m, double epsilon) {
  check_m(m);
  check_eps(epsilon);
  double i_star = epsilon == 0.0 ? 1.0 : classical_minimax(epsilon).i_star;
  if (!(m * i_star > 1.0))
    throw std::domain_error("suboptimality_ratio: breakdown phase");
  return (1.0 - 1.0 / m) / (1.0 - i_star / m);
}

PhaseGrid phase_grid(PhaseQuantity q, const std::vector<double>& eps_grid,
                     const std::vector<double>& inv_m_grid) {
  PhaseGrid out;
  out.eps = eps_grid;
  out.inv_m = inv_m_grid;
  out.value.resize(eps_grid.size() * inv_m_grid.size());
  for (size_t i = 0; i < eps_grid.size(); ++i) {
    double eps = eps_grid[i];
    double i_star = eps == 0.0 ? 1.0 : classical_minimax(eps).i_star;
    for (size_t j = 0; j < inv_m_grid.size(); ++j) {
      double inv_m = inv_m_grid[j];
      double v = kInf;
      if (inv_m < i_star && inv_m > 0.0 && inv_m < 1.0) {
        MinimaxSolution s = minimax(1.0 / inv_m, eps);
        switch (q) {
          case PhaseQuantity::VStar: v = s.v_star; break;
          case PhaseQuantity::KappaStar: v = s.kappa_underline_star; break;
          case PhaseQuantity::LambdaStar: v = s.lambda_star; break;
        }
      }
      out.value[i * inv_m_grid.size() + j] = v;
    }
  }
  return out;
}

std::vector<std::pair<double, double>> critical_curve(double lo, double hi, size_t n) {
  if (!(n >= 2) || !(lo > 0.0) || !(hi < 1.0) || !(lo < hi))
    throw std::invalid_argument("critical_curve: need 0 < lo < hi < 1, n >= 2");
  std::vector<std::pair<double, double>> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    double eps = lo + (hi - lo) * double(i) / double(n - 1);
    out.emplace_back(eps, classical_minimax(eps).i_star);
  }
  return out;
}

}  // namespace huberpl
