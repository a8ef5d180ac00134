#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "normal.hpp"
#include "quadrature_oracle.hpp"
#include "scalar_huber.hpp"

using namespace huberpl;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

/// Adaptive-free quadrature of f(z) phi(z) dz over [-12, 12] with a dense
/// composite Simpson rule; accurate far beyond 1e-10 for the smooth or
/// piecewise-quadratic integrands used here.
template <class F>
double gauss_expect(F f) {
  const int n = 400000;  // even
  const double a = -12.0, b = 12.0, h = (b - a) / n;
  double s = f(a) * norm_pdf(a) + f(b) * norm_pdf(b);
  for (int i = 1; i < n; ++i) {
    double z = a + i * h;
    s += (i % 2 ? 4.0 : 2.0) * f(z) * norm_pdf(z);
  }
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("huber loss and score spot values") {
  CHECK(huber_rho(0.3, 1.0) == doctest::Approx(0.045).epsilon(1e-14));
  CHECK(huber_rho(5.0, 1.0) == doctest::Approx(5.0 - 0.5).epsilon(1e-14));
  CHECK(huber_rho(2.0, kInf) == doctest::Approx(2.0).epsilon(1e-14));

  CHECK(huber_psi(0.3, 1.0) == doctest::Approx(0.3));
  CHECK(huber_psi(5.0, 1.0) == doctest::Approx(1.0));
  CHECK(huber_psi(-5.0, 1.0) == doctest::Approx(-1.0));

  CHECK(huber_psi_prime(0.0, 1.0) == 1.0);
  CHECK(huber_psi_prime(2.0, 1.0) == 0.0);
  CHECK(huber_psi_prime(1.0, 1.0) == 1.0);  // kink convention
  CHECK(huber_psi_prime(-1.0, 1.0) == 1.0);
}

TEST_CASE("regularized score spot values and identity") {
  CHECK(reg_psi(3.0, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK(reg_psi(1.0, 1.0, 1.0) == doctest::Approx(0.5));
  CHECK(reg_psi(0.4, 1.0, 3.0) == doctest::Approx(0.3));

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uz(-8.0, 8.0), ul(0.1, 4.0),
      ur(0.05, 6.0);
  for (int k = 0; k < 2000; ++k) {
    double z = uz(rng), lam = ul(rng), r = ur(rng);
    double lhs = reg_psi(z, lam, r);
    double rhs = (r / (1.0 + r)) * huber_psi(z, lam * (1.0 + r));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
    CHECK(std::fabs(lhs) <= r * lam + 1e-12);
    CHECK(reg_psi_prime(z, lam, r) ==
          doctest::Approx((r / (1.0 + r)) *
                          huber_psi_prime(z, lam * (1.0 + r))));
  }
}

TEST_CASE("regularized score monotonicity properties") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uz(0.0, 6.0), ul(0.1, 4.0),
      ur(0.05, 6.0), bump(1.0, 2.0);
  for (int k = 0; k < 2000; ++k) {
    double z = uz(rng), lam = ul(rng), r = ur(rng), f = bump(rng);
    // |z| -> |Psi| nondecreasing, |z| -> Psi' nonincreasing
    CHECK(std::fabs(reg_psi(z * f, lam, r)) >=
          std::fabs(reg_psi(z, lam, r)) - 1e-12);
    CHECK(reg_psi_prime(z * f, lam, r) <= reg_psi_prime(z, lam, r) + 1e-12);
    // r -> |Psi| nondecreasing, lambda -> |Psi| nondecreasing
    CHECK(std::fabs(reg_psi(z, lam, r * f)) >=
          std::fabs(reg_psi(z, lam, r)) - 1e-12);
    CHECK(std::fabs(reg_psi(z, lam * f, r)) >=
          std::fabs(reg_psi(z, lam, r)) - 1e-12);
  }
}

TEST_CASE("gaussian moments of the clipped score") {
  CHECK(a_gauss(1.0) == doctest::Approx(0.5161).epsilon(2e-4));
  CHECK(b_gauss(1.0) == doctest::Approx(0.6827).epsilon(2e-4));
  CHECK(a_gauss(40.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(b_gauss(40.0) == doctest::Approx(1.0).epsilon(1e-12));

  for (double kap : {0.3, 0.7, 1.0, 1.345, 2.5}) {
    double a_q = gauss_expect([&](double z) {
      double s = huber_psi(z, kap);
      return s * s;
    });
    // the indicator integrand defeats Simpson, so use the closed form
    double b_ref = std::erf(kap / std::sqrt(2.0));
    CHECK(a_gauss(kap) == doctest::Approx(a_q).epsilon(1e-10));
    CHECK(b_gauss(kap) == doctest::Approx(b_ref).epsilon(1e-12));
    // finite-difference check of the derivative of a_gauss
    double h = 1e-6;
    CHECK(a_gauss_prime(kap) ==
          doctest::Approx((a_gauss(kap + h) - a_gauss(kap - h)) / (2 * h))
              .epsilon(1e-5));
  }
}

TEST_CASE("scaling invariance of clipped-score moments") {
  // E psi'_{kappa sigma}(sigma Z) is independent of sigma and
  // E psi^2_{kappa sigma}(sigma Z) scales as sigma^2.
  for (double kap : {0.5, 1.0, 2.0}) {
    for (double sig : {1.0, 2.0, 5.0}) {
      // P(|sigma Z| <= kappa sigma) = erf(kappa/sqrt(2)) for every sigma
      double b_ref = std::erf(kap / std::sqrt(2.0));
      double a_q = gauss_expect([&](double z) {
        double s = huber_psi(sig * z, kap * sig);
        return s * s;
      });
      CHECK(b_ref == doctest::Approx(b_gauss(kap)).epsilon(1e-12));
      CHECK(a_q == doctest::Approx(sig * sig * a_gauss(kap)).epsilon(1e-10));
    }
  }
}

TEST_CASE("worst-case envelopes") {
  CHECK(b_bar(1.0, 0.1) == doctest::Approx(0.6144).epsilon(2e-4));
  CHECK(v_bar(40.0, 0.0) == doctest::Approx(1.0).epsilon(1e-10));
  for (double kap : {0.2, 0.8, 1.5, 3.0})
    for (double eps : {0.0, 0.05, 0.1, 0.3}) {
      CHECK(a_bar(kap, eps) ==
            doctest::Approx((1 - eps) * a_gauss(kap) + eps * kap * kap));
      CHECK(b_bar(kap, eps) == doctest::Approx((1 - eps) * b_gauss(kap)));
      CHECK(v_bar(kap, eps) ==
            doctest::Approx(a_bar(kap, eps) /
                            (b_bar(kap, eps) * b_bar(kap, eps))));
      // Fisher information of the least favorable law equals a_bar.
      CHECK(j_info(kap, eps) == doctest::Approx(a_bar(kap, eps)).epsilon(1e-14));
    }
}

TEST_CASE("classical minimax description") {
  ClassicalMinimax ls = classical_minimax(0.0);
  CHECK(ls.least_squares_limit);
  CHECK(std::isinf(ls.kappa_star));
  CHECK(ls.i_star == doctest::Approx(1.0));
  CHECK(ls.v_star == doctest::Approx(1.0));

  ClassicalMinimax c = classical_minimax(0.05);
  CHECK(c.i_star == doctest::Approx(0.7959).epsilon(1e-3));
  CHECK(c.v_star * c.i_star == doctest::Approx(1.0).epsilon(1e-9));

  ClassicalMinimax b = classical_minimax(0.1924);
  CHECK(b.i_star == doctest::Approx(0.5).epsilon(1e-3));

  // stationarity: the minimizer satisfies a_bar = b_bar exactly
  for (double eps : {0.01, 0.05, 0.1, 0.25}) {
    ClassicalMinimax s = classical_minimax(eps);
    CHECK(a_bar(s.kappa_star, eps) ==
          doctest::Approx(b_bar(s.kappa_star, eps)).epsilon(1e-9));
    CHECK(std::fabs(s.v_star * s.i_star - 1.0) <= 1e-6);
    // dense-grid oracle: no kappa on a fine grid does better
    for (int i = 1; i <= 3000; ++i) {
      double kap = 5.0 * i / 3000.0;
      CHECK(v_bar(kap, eps) >= s.v_star - 1e-9);
    }
  }
}

TEST_CASE("argument validation") {
  CHECK_THROWS_AS(huber_rho(1.0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(reg_psi(1.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(a_bar(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(classical_minimax(-0.1), std::invalid_argument);
}
