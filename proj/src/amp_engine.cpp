#include "amp_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "errors.hpp"
#include "scalar_huber.hpp"

namespace huberpl {

namespace {

uint64_t splitmix64(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Independent generator for (seed, stream); used for X, noise, and
/// per-replication streams so that toggling one draw source never
/// perturbs another.
std::mt19937_64 make_stream(uint64_t seed, uint64_t stream) {
  uint64_t s = seed;
  uint64_t a = splitmix64(s);
  s ^= (stream + 1) * 0x9e3779b97f4a7c15ULL;
  uint64_t b = splitmix64(s);
  return std::mt19937_64(a ^ (b << 1));
}

void check_shape(long n, long p) {
  if (p < 1 || n <= p)
    throw std::invalid_argument("need n > p >= 1");
}

}  // namespace

Dataset gen_dataset(long n, long p, const Contamination& noise, uint64_t seed,
                    const Eigen::VectorXd* theta0, ContaminationPlacement placement) {
  check_shape(n, p);
  noise.validate();
  if (!noise.proper())
    throw std::invalid_argument("gen_dataset: extremal law cannot be sampled");

  Dataset ds;
  ds.noise = noise;
  ds.seed = seed;
  ds.X.resize(n, p);
  ds.Y.resize(n);
  ds.theta0 = theta0 ? *theta0 : Eigen::VectorXd::Zero(p);
  if (ds.theta0.size() != p)
    throw std::invalid_argument("gen_dataset: theta0 has wrong length");

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  auto xs = make_stream(seed, 0);
  const double scale = 1.0 / std::sqrt(double(n));
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < p; ++j) ds.X(i, j) = scale * gauss(xs);

  auto ws = make_stream(seed, 1);
  Eigen::VectorXd w(n);
  for (long i = 0; i < n; ++i) w[i] = noise.sigma_base * gauss(ws);

  auto cs = make_stream(seed, 2);
  std::vector<char> hit(static_cast<size_t>(n), 0);
  if (noise.epsilon > 0.0) {
    if (placement == ContaminationPlacement::Bernoulli) {
      for (long i = 0; i < n; ++i) hit[size_t(i)] = unif(cs) < noise.epsilon;
    } else {
      long k = std::lround(noise.epsilon * double(n));
      std::vector<long> idx(static_cast<size_t>(n));
      std::iota(idx.begin(), idx.end(), 0L);
      for (long i = n - 1; i > 0; --i) {
        long j = long(cs() % uint64_t(i + 1));
        std::swap(idx[size_t(i)], idx[size_t(j)]);
      }
      for (long i = 0; i < k; ++i) hit[size_t(idx[size_t(i)])] = 1;
    }
    for (long i = 0; i < n; ++i) {
      if (!hit[size_t(i)]) continue;
      double v = noise.mu;
      if (noise.kind == NoiseKind::SymmetricTwoPoint && unif(cs) < 0.5) v = -v;
      w[i] = v;
    }
  }

  ds.Y = ds.X * ds.theta0 + w;
  return ds;
}

void write_dataset_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "y";
  for (long j = 0; j < ds.p(); ++j) out << ",x_" << (j + 1);
  out << "\n";
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (long i = 0; i < ds.n(); ++i) {
    put(ds.Y[i]);
    for (long j = 0; j < ds.p(); ++j) {
      out << ',';
      put(ds.X(i, j));
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path);
  long p = std::count(line.begin(), line.end(), ',');
  if (p < 1) throw std::runtime_error("malformed header: " + path);
  std::vector<double> vals;
  long n = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    long count = 0;
    while (std::getline(row, cell, ',')) {
      vals.push_back(std::stod(cell));
      ++count;
    }
    if (count != p + 1) throw std::runtime_error("ragged row in " + path);
    ++n;
  }
  check_shape(n, p);
  Dataset ds;
  ds.X.resize(n, p);
  ds.Y.resize(n);
  ds.theta0 = Eigen::VectorXd::Zero(p);
  for (long i = 0; i < n; ++i) {
    ds.Y[i] = vals[size_t(i * (p + 1))];
    for (long j = 0; j < p; ++j) ds.X(i, j) = vals[size_t(i * (p + 1) + 1 + j)];
  }
  return ds;
}

double huber_objective(const Dataset& ds, const Eigen::VectorXd& theta, double lambda) {
  Eigen::VectorXd res = ds.Y - ds.X * theta;
  double obj = 0.0;
  for (long i = 0; i < res.size(); ++i) obj += huber_rho(res[i], lambda);
  return obj;
}

double empirical_slope_root(const Eigen::VectorXd& residuals, double lambda, double m) {
  const long n = residuals.size();
  if (n < 1) throw std::invalid_argument("empty residual vector");
  if (!(m > 1.0)) throw std::invalid_argument("m must exceed 1");
  if (std::isinf(lambda)) return 1.0 / (m - 1.0);  // nothing is ever clipped

  std::vector<double> a(static_cast<size_t>(n));
  for (long i = 0; i < n; ++i) a[size_t(i)] = std::fabs(residuals[i]);
  std::sort(a.begin(), a.end());

  // The left-hand side f(r) = (r/(1+r)) * k(lambda(1+r))/n is nondecreasing
  // and piecewise continuous in r, with upward jumps where the clip count k
  // changes.  On the piece where the count equals k, the exact root is
  // r = 1/(m k/n - 1); if 1/m instead falls inside a jump, the crossing of
  // the monotone envelope is the jump location itself.  Pieces are scanned
  // in increasing r so the first hit is the leftmost crossing.
  const double target = 1.0 / m;
  for (long k = 1; k <= n; ++k) {
    double r_lo = a[size_t(k - 1)] / lambda - 1.0;
    double r_hi = (k == n) ? std::numeric_limits<double>::infinity()
                           : a[size_t(k)] / lambda - 1.0;
    if (r_lo < 0.0) r_lo = 0.0;
    if (!(r_hi > r_lo)) continue;  // empty piece (tied magnitudes)
    double denom = m * double(k) / double(n) - 1.0;
    if (denom > 0.0) {
      double r = 1.0 / denom;
      if (r >= r_lo && r < r_hi) return r;  // genuine root on this piece
    }
    if (r_lo > 0.0 && (r_lo / (1.0 + r_lo)) * double(k) / double(n) >= target)
      return r_lo;  // envelope jumps across 1/m here
  }
  throw SlopeInfeasibleError("empirical slope equation has no root");
}

AMPResult amp_fit(const Dataset& ds, double lambda, int max_iter, double tol,
                  const AMPObserver& observer) {
  if (std::isnan(lambda) || lambda <= 0.0)
    throw std::invalid_argument("lambda must be positive");
  const long n = ds.n(), p = ds.p();
  const double m = double(n) / double(p);
  if (!(m > 1.0)) throw std::invalid_argument("amp_fit: need n > p");

  AMPResult out;
  out.theta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd R = ds.Y;  // adjusted residuals, Onsager-corrected after t = 0
  Eigen::VectorXd psi(n);
  double r = 0.0;

  for (int t = 0; t < max_iter; ++t) {
    try {
      r = empirical_slope_root(R, lambda, m);
    } catch (SlopeInfeasibleError&) {
      throw SlopeInfeasibleError("amp_fit: slope equation infeasible", t);
    }
    if (observer) observer(t, R, r);
    for (long i = 0; i < n; ++i) psi[i] = reg_psi(R[i], lambda, r);
    Eigen::VectorXd theta_next = out.theta + m * (ds.X.transpose() * psi);
    double step = (theta_next - out.theta).norm() / std::sqrt(double(p));
    out.theta = theta_next;
    out.iterations = t + 1;
    R = ds.Y - ds.X * out.theta + psi;
    if (step <= tol) {
      out.converged = true;
      break;
    }
  }
  out.residuals = R;
  out.r = r;
  return out;
}

IRLSResult irls_fit(const Dataset& ds, double lambda, int max_iter, double tol) {
  if (std::isnan(lambda) || lambda <= 0.0)
    throw std::invalid_argument("lambda must be positive");
  const long n = ds.n(), p = ds.p();
  if (n <= p) throw std::invalid_argument("irls_fit: need n > p");

  IRLSResult out;
  // Least-squares start; also the fixed point when lambda = +inf.
  Eigen::MatrixXd G = ds.X.transpose() * ds.X;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw SingularSystemError("irls_fit: X'X is rank deficient");
  out.theta = ldlt.solve(ds.X.transpose() * ds.Y);

  Eigen::VectorXd res(n), sw(n);
  Eigen::MatrixXd Xw(n, p);
  auto reweighted_step = [&](const Eigen::VectorXd& th,
                             double lam) -> Eigen::VectorXd {
    res = ds.Y - ds.X * th;
    for (long i = 0; i < n; ++i) {
      double az = std::fabs(res[i]);
      sw[i] = std::sqrt(az <= lam ? 1.0 : lam / az);
    }
    Xw = sw.asDiagonal() * ds.X;
    Eigen::LDLT<Eigen::MatrixXd> step(Eigen::MatrixXd(Xw.transpose() * Xw));
    if (step.info() != Eigen::Success || !step.isPositive())
      throw SingularSystemError("irls_fit: weighted system is rank deficient");
    return step.solve(Xw.transpose() * (sw.asDiagonal() * ds.Y));
  };

  // Continuation warm start: a few reweighting sweeps at geometrically
  // shrinking thresholds move the least-squares start into the basin of a
  // small target threshold, where the plain iteration is slow.
  if (std::isfinite(lambda)) {
    Eigen::VectorXd r0 = ds.Y - ds.X * out.theta;
    std::vector<double> mag(static_cast<size_t>(n));
    for (long i = 0; i < n; ++i) mag[size_t(i)] = std::fabs(r0[i]);
    std::nth_element(mag.begin(), mag.begin() + size_t(0.9 * double(n)),
                     mag.end());
    double lam_cur = mag[size_t(0.9 * double(n))];
    while (lam_cur > 2.0 * lambda) {
      for (int sweep = 0; sweep < 2; ++sweep)
        out.theta = reweighted_step(out.theta, lam_cur);
      lam_cur *= 0.25;
    }
  }

  double prev_obj = huber_objective(ds, out.theta, lambda);

  // Anderson acceleration over the reweighting map; each accelerated
  // candidate is accepted only when it does not raise the objective, so the
  // monotone-descent property of the plain iteration is preserved.
  const int kMem = 5;
  Eigen::MatrixXd dF(p, kMem), dG(p, kMem);
  Eigen::VectorXd f_prev(p), g_prev(p);
  int hist = 0, slot = 0;

  for (int t = 1; t <= max_iter; ++t) {
    out.iterations = t;
    if (std::isinf(lambda)) {  // weights are identically 1
      out.converged = true;
      break;
    }
    Eigen::VectorXd f = reweighted_step(out.theta, lambda);
    Eigen::VectorXd g = f - out.theta;

    Eigen::VectorXd theta_next = f;
    double obj = huber_objective(ds, f, lambda);
    if (hist > 0) {
      Eigen::VectorXd gamma =
          dG.leftCols(hist).colPivHouseholderQr().solve(g);
      Eigen::VectorXd cand = f - dF.leftCols(hist) * gamma;
      double cand_obj = huber_objective(ds, cand, lambda);
      if (cand_obj <= obj) {
        theta_next = cand;
        obj = cand_obj;
      }
    }
    if (t > 1) {
      dF.col(slot) = f - f_prev;
      dG.col(slot) = g - g_prev;
      slot = (slot + 1) % kMem;
      hist = std::min(hist + 1, kMem);
    }
    f_prev = f;
    g_prev = g;

    double delta = (theta_next - out.theta).norm() / std::sqrt(double(p));
    out.theta = theta_next;
    if (obj > prev_obj + 1e-8 * (1.0 + std::fabs(prev_obj)))
      throw NumericError("irls_fit: objective increased");
    prev_obj = obj;
    if (delta <= tol) {
      out.converged = true;
      break;
    }
  }
  out.objective = prev_obj;
  return out;
}

MCSummary monte_carlo(long n, long p, const Contamination& noise, double lambda,
                      long reps, uint64_t seed, Solver solver, int threads) {
  check_shape(n, p);
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");
  std::vector<double> mse(size_t(reps),
                          std::numeric_limits<double>::quiet_NaN());

  auto run_rep = [&](long rep) {
    uint64_t s = seed;
    (void)splitmix64(s);
    s ^= uint64_t(rep) * 0xd1342543de82ef95ULL;
    uint64_t rep_seed = splitmix64(s);
    Dataset ds = gen_dataset(n, p, noise, rep_seed);
    Eigen::VectorXd theta;
    if (solver == Solver::IRLS)
      theta = irls_fit(ds, lambda, 500, 1e-8).theta;
    else
      theta = amp_fit(ds, lambda, 2000, 1e-8).theta;
    mse[size_t(rep)] = (theta - ds.theta0).squaredNorm() / double(p);
  };

  long nthreads = threads > 0 ? threads : long(std::thread::hardware_concurrency());
  nthreads = std::max(1L, std::min(nthreads, reps));
  std::vector<long> fail_counts(size_t(nthreads), 0);
  if (nthreads == 1) {
    for (long rep = 0; rep < reps; ++rep) {
      try {
        run_rep(rep);
      } catch (const std::exception&) {
        ++fail_counts[0];
      }
    }
  } else {
    std::vector<std::thread> pool;
    for (long t = 0; t < nthreads; ++t) {
      pool.emplace_back([&, t]() {
        for (long rep = t; rep < reps; rep += nthreads) {
          try {
            run_rep(rep);
          } catch (const std::exception&) {
            ++fail_counts[size_t(t)];
          }
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  MCSummary out;
  out.reps = reps;
  for (long f : fail_counts) out.failures += f;
  long ok = 0;
  double sum = 0.0;
  for (double v : mse)
    if (!std::isnan(v)) { sum += v; ++ok; }
  if (ok == 0) throw NumericError("monte_carlo: every replication failed");
  out.per_coordinate_mse = sum / double(ok);
  double ss = 0.0;
  for (double v : mse)
    if (!std::isnan(v)) ss += (v - out.per_coordinate_mse) * (v - out.per_coordinate_mse);
  out.mc_std_error = ok > 1 ? std::sqrt(ss / double(ok - 1) / double(ok)) : 0.0;
  out.se_estimate = std::sqrt(out.per_coordinate_mse);
  return out;
}

}  // namespace huberpl
