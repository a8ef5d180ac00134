#include "state_evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "errors.hpp"
#include "normal.hpp"
#include "scalar_huber.hpp"

namespace huberpl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_args(double tau_sq, double lambda, const Contamination& noise) {
  noise.validate();
  if (!(tau_sq >= 0.0) || !std::isfinite(tau_sq))
    throw std::invalid_argument("tau_sq must be finite and nonnegative");
  if (std::isnan(lambda) || lambda <= 0.0)
    throw std::invalid_argument("lambda must be positive");
}

/// P(|X| <= c) for X ~ N(mu, tau^2); the tau = 0 kink resolves to 1.
double clip_prob(double mu, double tau, double c) {
  if (std::isinf(c)) return 1.0;
  if (tau == 0.0) return std::fabs(mu) <= c ? 1.0 : 0.0;
  return norm_cdf((c - mu) / tau) - norm_cdf((-c - mu) / tau);
}

/// E psi_c(X)^2 for X ~ N(mu, tau^2): truncated second moment plus the
/// clipped tail mass.
double clip_second_moment(double mu, double tau, double c) {
  if (std::isinf(c)) return mu * mu + tau * tau;
  if (tau == 0.0) {
    double v = std::min(std::fabs(mu), c);
    return v * v;
  }
  double alpha = (-c - mu) / tau, beta = (c - mu) / tau;
  double Pa = norm_cdf(alpha), Pb = norm_cdf(beta);
  double pa = norm_pdf(alpha), pb = norm_pdf(beta);
  double body = mu * mu * (Pb - Pa) + 2.0 * mu * tau * (pa - pb) +
                tau * tau * ((Pb - Pa) + alpha * pa - beta * pb);
  double tails = 1.0 - (Pb - Pa);
  return body + c * c * tails;
}

double effective_lambda(double tau_sq, const SEConfig& cfg) {
  if (cfg.mode == TuningMode::FixedLambda) return cfg.tuning;
  double sb = cfg.noise.sigma_base;
  return cfg.tuning * std::sqrt(sb * sb + tau_sq);
}

}  // namespace

double eff_slope(double tau_sq, double r, double lambda, const Contamination& noise) {
  check_args(tau_sq, lambda, noise);
  if (!(r > 0.0) || !std::isfinite(r))
    throw std::invalid_argument("r must be positive and finite");
  double c = lambda * (1.0 + r);
  double tau = std::sqrt(tau_sq);
  double s = std::sqrt(noise.sigma_base * noise.sigma_base + tau_sq);
  double gauss = std::isinf(c) ? 1.0 : b_gauss(c / s);
  double contam = 0.0;
  switch (noise.kind) {
    case NoiseKind::None: break;
    case NoiseKind::SymmetricTwoPoint:
    case NoiseKind::PointMass:
      contam = clip_prob(noise.mu, tau, c);
      break;
    case NoiseKind::AtInfinity:
      contam = 0.0;
      break;
  }
  double eps = noise.epsilon;
  return (r / (1.0 + r)) * ((1.0 - eps) * gauss + eps * contam);
}

double variance_map(double tau_sq, double r, double lambda, const Contamination& noise) {
  check_args(tau_sq, lambda, noise);
  if (!(r > 0.0) || !std::isfinite(r))
    throw std::invalid_argument("r must be positive and finite");
  double c = lambda * (1.0 + r);
  double tau = std::sqrt(tau_sq);
  double s2 = noise.sigma_base * noise.sigma_base + tau_sq;
  double gauss = std::isinf(c) ? s2 : s2 * a_gauss(c / std::sqrt(s2));
  double contam = 0.0;
  switch (noise.kind) {
    case NoiseKind::None: break;
    case NoiseKind::SymmetricTwoPoint:
    case NoiseKind::PointMass:
      // Symmetry of psi_c^2 makes the +-mu branches agree.
      contam = clip_second_moment(noise.mu, tau, c);
      break;
    case NoiseKind::AtInfinity:
      contam = c * c;  // contamination always lands on the clip
      break;
  }
  double eps = noise.epsilon;
  double f = r / (1.0 + r);
  return f * f * ((1.0 - eps) * gauss + eps * contam);
}

std::optional<double> solve_r(double tau_sq, double m, double lambda,
                              const Contamination& noise) {
  check_args(tau_sq, lambda, noise);
  if (!(m > 1.0)) throw std::invalid_argument("m must exceed 1");
  const double target = 1.0 / m;
  auto B = [&](double r) { return eff_slope(tau_sq, r, lambda, noise); };

  // Expand upward until the slope clears the target; under the extremal
  // law sup_r B = 1 - eps, so the expansion may legitimately fail.
  double r_hi = 1.0;
  while (B(r_hi) < target) {
    r_hi *= 2.0;
    if (r_hi > 1e13) return std::nullopt;
  }

  // Scan log-spaced points to land on the leftmost crossing, then bisect.
  const double r_lo = 1e-8;
  const int K = 64;
  double a = r_lo, b = r_hi;
  if (B(r_lo) < target) {
    double la = std::log(r_lo), lb = std::log(r_hi);
    double prev = r_lo;
    for (int i = 1; i <= K; ++i) {
      double x = std::exp(la + (lb - la) * i / K);
      if (B(x) >= target) { a = prev; b = x; break; }
      prev = x;
    }
  } else {
    // Crossing below the scan floor; bracket is (0, r_lo].
    a = std::numeric_limits<double>::min();
    b = r_lo;
  }
  for (int it = 0; it < 200 && (b - a) > 1e-14 * std::max(b, 1e-12); ++it) {
    double mid = 0.5 * (a + b);
    (B(mid) < target ? a : b) = mid;
  }
  return 0.5 * (a + b);
}

double t_map(double tau_sq, const SEConfig& cfg) {
  double lambda = effective_lambda(tau_sq, cfg);
  auto r = solve_r(tau_sq, cfg.m, lambda, cfg.noise);
  if (!r) throw NoSolutionError("t_map: slope equation has no root");
  return cfg.m * variance_map(tau_sq, *r, lambda, cfg.noise);
}

SEFixedPoint fixed_point(const SEConfig& cfg) {
  cfg.noise.validate();
  if (!(cfg.m > 1.0)) throw std::invalid_argument("m must exceed 1");
  if (!(cfg.tau0_sq >= 0.0)) throw std::invalid_argument("tau0_sq must be >= 0");
  double tol = cfg.tol > 0.0 ? cfg.tol : 1e-10;
  int max_iter = cfg.max_iter > 0 ? cfg.max_iter : 10000;

  SEFixedPoint out;
  double tau = cfg.tau0_sq;
  int expanding = 0, flips = 0;
  double prev_delta = 0.0;

  auto step = [&](double t, double* r_out) -> std::optional<double> {
    double lambda = effective_lambda(t, cfg);
    auto r = solve_r(t, cfg.m, lambda, cfg.noise);
    if (!r) return std::nullopt;
    if (r_out) *r_out = *r;
    return cfg.m * variance_map(t, *r, lambda, cfg.noise);
  };

  for (int it = 1; it <= max_iter; ++it) {
    double r = 0.0;
    auto next_opt = step(tau, &r);
    out.iterations = it;
    if (!next_opt) {
      out.status = SEStatus::NoSolution;
      out.tau_sq = tau;
      return out;
    }
    double next = *next_opt;
    if (out.trace.size() < 4096) out.trace.emplace_back(next, r);

    double delta = next - tau;
    if (std::fabs(delta) <= tol * (1.0 + tau)) {
      out.status = SEStatus::Converged;
      out.tau_sq = next;
      out.r = r;
      out.avar = cfg.m * next;
      return out;
    }
    // Count only genuinely expanding steps (>=1% growth) above the
    // ceiling, so a large-but-finite fixed point is not misflagged.
    if (next > cfg.divergence_ceiling && next > 1.01 * tau) {
      if (++expanding >= 50) {
        out.status = SEStatus::Diverged;
        out.tau_sq = kInf;
        out.avar = kInf;
        return out;
      }
    } else {
      expanding = 0;
    }
    if (it > 1 && delta * prev_delta < 0.0 && ++flips > 6) {
      // Oscillation: fall back to bisection on g(x) = T(x) - x over the
      // interval straddled by the last two iterates.
      double lo = std::min(tau, next), hi = std::max(tau, next);
      auto g = [&](double x) -> double {
        auto v = step(x, nullptr);
        if (!v) throw NoSolutionError("fixed_point: no slope root in fallback");
        return *v - x;
      };
      if (g(lo) > 0.0 && g(hi) < 0.0) {
        for (int k = 0; k < 200 && hi - lo > tol * (1.0 + lo); ++k) {
          double mid = 0.5 * (lo + hi);
          (g(mid) > 0.0 ? lo : hi) = mid;
        }
        double fp = 0.5 * (lo + hi);
        double rr = 0.0;
        step(fp, &rr);
        out.status = SEStatus::Converged;
        out.tau_sq = fp;
        out.r = rr;
        out.avar = cfg.m * fp;
        return out;
      }
    }
    prev_delta = delta;
    tau = next;
  }
  out.status = SEStatus::MaxIter;
  out.tau_sq = tau;
  return out;
}

std::optional<double> calibrate_lambda_from_kappa(double m, double kappa,
                                                  const Contamination& noise) {
  if (!(kappa > 0.0) || !std::isfinite(kappa))
    throw std::invalid_argument("kappa must be positive and finite");
  SEConfig cfg;
  cfg.m = m;
  cfg.mode = TuningMode::FloatingKappa;
  cfg.tuning = kappa;
  cfg.noise = noise;
  auto fp = fixed_point(cfg);
  if (fp.status != SEStatus::Converged) return std::nullopt;
  double sb = noise.sigma_base;
  return kappa * std::sqrt(sb * sb + fp.tau_sq);
}

std::optional<double> calibrate_kappa_from_lambda(double m, double lambda,
                                                  const Contamination& noise) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("lambda must be positive and finite");
  noise.validate();
  // lambda(kappa) = kappa * sigma_inf(kappa) >= kappa * sigma_base and is
  // increasing where defined, so the root lies in (0, lambda / sigma_base].
  auto forward = [&](double kappa) -> double {
    auto lam = calibrate_lambda_from_kappa(m, kappa, noise);
    return lam ? *lam : kInf;  // divergence counts as +inf
  };
  double lo = 1e-8, hi = lambda / noise.sigma_base;
  if (forward(lo) > lambda) return std::nullopt;
  for (int it = 0; it < 100 && hi - lo > 1e-9 * (1.0 + lo); ++it) {
    double mid = 0.5 * (lo + hi);
    (forward(mid) <= lambda ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace huberpl
