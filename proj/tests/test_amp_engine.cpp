#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "amp_engine.hpp"
#include "errors.hpp"
#include "lfse_minimax.hpp"
#include "scalar_huber.hpp"
#include "state_evolution.hpp"

using namespace huberpl;

namespace {
const double kInf = std::numeric_limits<double>::infinity();

/// Golden-section minimizer of the scalar location objective.
double scalar_location_fit(const Eigen::VectorXd& y, double lambda) {
  double a = y.minCoeff() - 1.0, b = y.maxCoeff() + 1.0;
  auto obj = [&](double th) {
    double s = 0.0;
    for (long i = 0; i < y.size(); ++i) s += huber_rho(y[i] - th, lambda);
    return s;
  };
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = obj(c), fd = obj(d);
  while (b - a > 1e-12) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = obj(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = obj(d);
    }
  }
  return 0.5 * (a + b);
}
}  // namespace

TEST_CASE("gen_dataset: determinism, shape and normalization") {
  Contamination nz = Contamination::two_point(0.1, 5.0);
  Dataset d1 = gen_dataset(200, 50, nz, 42);
  Dataset d2 = gen_dataset(200, 50, nz, 42);
  CHECK((d1.X - d2.X).norm() == 0.0);
  CHECK((d1.Y - d2.Y).norm() == 0.0);
  CHECK((gen_dataset(200, 50, nz, 43).X - d1.X).norm() > 0.0);

  CHECK(d1.n() == 200);
  CHECK(d1.p() == 50);
  CHECK(d1.theta0.isZero());
  // columns have expected squared norm 1 under the 1/n scaling
  double mean_sq = 0.0;
  for (long j = 0; j < d1.p(); ++j) mean_sq += d1.X.col(j).squaredNorm();
  mean_sq /= double(d1.p());
  CHECK(mean_sq == doctest::Approx(1.0).epsilon(0.05));

  // theta0 = 0 makes Y the raw noise
  Dataset g = gen_dataset(100, 10, Contamination::gaussian(), 7);
  CHECK(g.Y.squaredNorm() / 100.0 == doctest::Approx(1.0).epsilon(0.5));

  CHECK_THROWS_AS(gen_dataset(100, 10, Contamination::at_infinity(0.1), 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(gen_dataset(10, 10, nz, 1), std::invalid_argument);
}

TEST_CASE("gen_dataset: contamination frequency across seeds") {
  Contamination nz = Contamination::point_mass(0.1, 50.0);
  long hits = 0, total = 0;
  for (uint64_t s = 0; s < 200; ++s) {
    Dataset d = gen_dataset(100, 5, nz, s);
    for (long i = 0; i < d.n(); ++i)
      if (std::fabs(d.Y[i]) > 25.0) ++hits;
    total += d.n();
  }
  double freq = double(hits) / double(total);
  // Binomial(20000, 0.1): three sigma is about 0.0064
  CHECK(freq == doctest::Approx(0.1).epsilon(0.08));

  // FixedCount placement: exactly round(eps n) contaminated rows per rep
  Dataset d = gen_dataset(100, 5, nz, 9, nullptr,
                          ContaminationPlacement::FixedCount);
  long cnt = 0;
  for (long i = 0; i < d.n(); ++i)
    if (std::fabs(d.Y[i]) > 25.0) ++cnt;
  CHECK(cnt == 10);
}

TEST_CASE("dataset csv round trip") {
  Contamination nz = Contamination::two_point(0.05, 5.0);
  Dataset d = gen_dataset(30, 4, nz, 11);
  std::string path = "amp_engine_roundtrip.csv";
  write_dataset_csv(d, path);
  Dataset back = read_dataset_csv(path);
  CHECK(back.n() == d.n());
  CHECK(back.p() == d.p());
  CHECK((back.X - d.X).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK((back.Y - d.Y).lpNorm<Eigen::Infinity>() <= 1e-12);
  std::filesystem::remove(path);
}

TEST_CASE("empirical_slope_root") {
  Eigen::VectorXd res(6);
  res << 0.1, -0.2, 0.5, -1.0, 2.0, -4.0;

  // lambda = inf: every residual counts, r = 1/(m-1)
  CHECK(empirical_slope_root(res, kInf, 2.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(empirical_slope_root(res, kInf, 3.0) ==
        doctest::Approx(0.5).epsilon(1e-12));

  // brute-force oracle: the returned r solves the piecewise equation and
  // no smaller r does
  double lam = 1.0, m = 2.0;
  double r = empirical_slope_root(res, lam, m);
  auto slope = [&](double rr) {
    long cnt = 0;
    for (long i = 0; i < res.size(); ++i)
      if (std::fabs(res[i]) <= lam * (1.0 + rr)) ++cnt;
    return (rr / (1.0 + rr)) * double(cnt) / double(res.size());
  };
  CHECK(slope(r) == doctest::Approx(1.0 / m).epsilon(1e-10));
  for (double rr = r / 100.0; rr < r * 0.999; rr *= 1.07)
    CHECK(slope(rr) < 1.0 / m);

  // when 1/m falls inside a jump of the piecewise-constant count, the
  // crossing of the monotone envelope (the jump location) is returned
  Eigen::VectorXd bad(4);
  bad << 100.0, -200.0, 300.0, -400.0;
  double lam2 = 1e-6, m2 = 1.01;
  double rj = empirical_slope_root(bad, lam2, m2);
  CHECK(rj == doctest::Approx(400.0 / lam2 - 1.0).epsilon(1e-12));
  auto slope2 = [&](double rr) {
    long cnt = 0;
    for (long i = 0; i < bad.size(); ++i)
      if (std::fabs(bad[i]) <= lam2 * (1.0 + rr)) ++cnt;
    return (rr / (1.0 + rr)) * double(cnt) / double(bad.size());
  };
  CHECK(slope2(rj) >= 1.0 / m2);
  CHECK(slope2(rj * (1.0 - 1e-9)) < 1.0 / m2);
}

TEST_CASE("amp_fit: clean recovery and slope equation per iterate") {
  // exact data, wide threshold: AMP reaches theta0
  Eigen::VectorXd theta0 = Eigen::VectorXd::Constant(20, 0.7);
  Dataset d = gen_dataset(100, 20, Contamination::gaussian(), 5, &theta0);
  d.Y = d.X * theta0;  // strip the noise
  AMPResult out = amp_fit(d, 10.0, 2000, 1e-12);
  CHECK(out.converged);
  CHECK((out.theta - theta0).norm() / std::sqrt(20.0) <= 1e-8);

  // the slope equation holds at the final iterate
  double m = double(d.n()) / double(d.p());
  double c = 10.0 * (1.0 + out.r);
  long cnt = 0;
  for (long i = 0; i < d.n(); ++i)
    if (std::fabs(out.residuals[i]) <= c) ++cnt;
  CHECK((out.r / (1.0 + out.r)) * double(cnt) / double(d.n()) ==
        doctest::Approx(1.0 / m).epsilon(1e-8));
}

TEST_CASE("amp_fit matches irls_fit away from breakdown") {
  Dataset d = gen_dataset(200, 50, Contamination::gaussian(), 3);
  AMPResult a = amp_fit(d, 10.0, 2000, 1e-11);
  IRLSResult ir = irls_fit(d, 10.0, 500, 1e-12);
  CHECK(a.converged);
  CHECK(ir.converged);
  CHECK((a.theta - ir.theta).norm() / std::sqrt(50.0) <= 1e-6);
  CHECK(ir.objective <= huber_objective(d, a.theta, 10.0) + 1e-8);
}

TEST_CASE("irls_fit: least-squares limit and scalar location oracle") {
  Dataset d = gen_dataset(100, 20, Contamination::two_point(0.1, 5.0), 13);
  IRLSResult ls = irls_fit(d, kInf, 10, 1e-12);
  Eigen::VectorXd ols =
      (d.X.transpose() * d.X).ldlt().solve(d.X.transpose() * d.Y);
  CHECK((ls.theta - ols).lpNorm<Eigen::Infinity>() <= 1e-10);

  // p = 1 with a constant column reduces to scalar location estimation
  Dataset loc;
  loc.X = Eigen::MatrixXd::Ones(40, 1);
  loc.Y = gen_dataset(40, 1, Contamination::two_point(0.2, 8.0), 21).Y;
  loc.theta0 = Eigen::VectorXd::Zero(1);
  IRLSResult fit = irls_fit(loc, 1.5, 500, 1e-12);
  CHECK(fit.theta[0] ==
        doctest::Approx(scalar_location_fit(loc.Y, 1.5)).epsilon(1e-7));
}

TEST_CASE("equivariance: shifting theta0 shifts the estimate exactly") {
  Contamination nz = Contamination::two_point(0.05, 5.0);
  Dataset base = gen_dataset(120, 30, nz, 77);
  Eigen::VectorXd shift = Eigen::VectorXd::LinSpaced(30, -1.0, 2.0);
  Dataset moved = gen_dataset(120, 30, nz, 77, &shift);
  // same seed: identical design and noise, only the signal moves
  CHECK((base.X - moved.X).norm() == 0.0);
  CHECK((moved.Y - base.Y - base.X * shift).lpNorm<Eigen::Infinity>() <=
        1e-12);
  IRLSResult f0 = irls_fit(base, 1.0, 500, 1e-11);
  IRLSResult f1 = irls_fit(moved, 1.0, 500, 1e-11);
  CHECK(((f1.theta - shift) - f0.theta).lpNorm<Eigen::Infinity>() <= 1e-6);
}

TEST_CASE("monte_carlo: determinism and the least-squares reference") {
  Contamination nz = Contamination::two_point(0.05, 5.0);
  MCSummary s1 = monte_carlo(60, 20, nz, 1.0, 8, 5);
  MCSummary s2 = monte_carlo(60, 20, nz, 1.0, 8, 5);
  CHECK(s1.per_coordinate_mse == s2.per_coordinate_mse);
  CHECK(s1.reps == 8);
  CHECK(s1.failures == 0);
  CHECK(s1.se_estimate ==
        doctest::Approx(std::sqrt(s1.per_coordinate_mse)).epsilon(1e-12));

  // OLS with Gaussian noise: per-coordinate mse near m/(m-1) = 2
  MCSummary ols = monte_carlo(100, 50, Contamination::gaussian(), kInf, 40, 9);
  CHECK(ols.per_coordinate_mse == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("monte_carlo agrees with the state-evolution prediction") {
  double m = 2.0;
  MinimaxSolution mm = minimax(m, 0.05);
  Contamination nz = Contamination::two_point(0.05, 5.0);
  SEConfig cfg;
  cfg.m = m;
  cfg.tuning = mm.lambda_star;
  cfg.noise = nz;
  SEFixedPoint fp = fixed_point(cfg);
  REQUIRE(fp.status == SEStatus::Converged);
  MCSummary mc = monte_carlo(300, 150, nz, mm.lambda_star, 30, 17);
  CHECK(mc.failures == 0);
  CHECK(std::fabs(mc.per_coordinate_mse - fp.avar) <=
        3.0 * mc.mc_std_error + 0.05 * fp.avar);
}
