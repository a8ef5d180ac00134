#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "contamination.hpp"

namespace huberpl {

/// Synthetic regression instance Y = X theta0 + W with X_ij ~ N(0, 1/n)
/// and W drawn from the contaminated law. Columns of X are deterministic
/// functions of the seed; theta0 defaults to zero.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd Y;
  Eigen::VectorXd theta0;
  Contamination noise;
  uint64_t seed = 0;

  long n() const { return X.rows(); }
  long p() const { return X.cols(); }
};

enum class ContaminationPlacement {
  Bernoulli,  ///< each row contaminated independently with prob eps
  FixedCount  ///< exactly round(eps * n) rows, at uniformly random positions
};

Dataset gen_dataset(long n, long p, const Contamination& noise, uint64_t seed,
                    const Eigen::VectorXd* theta0 = nullptr,
                    ContaminationPlacement placement = ContaminationPlacement::Bernoulli);

void write_dataset_csv(const Dataset& ds, const std::string& path);
Dataset read_dataset_csv(const std::string& path);

/// Huber objective sum_i rho_lambda(y_i - x_i' theta).
double huber_objective(const Dataset& ds, const Eigen::VectorXd& theta, double lambda);

/// Smallest root of the empirical slope equation
/// (1/n) sum_i Psi'(R_i; lambda, r) = 1/m over r > 0, located exactly on
/// the sorted-residual count structure. Throws SlopeInfeasibleError.
double empirical_slope_root(const Eigen::VectorXd& residuals, double lambda, double m);

struct AMPResult {
  Eigen::VectorXd theta;
  Eigen::VectorXd residuals;  ///< final adjusted residuals R^t
  double r = 0.0;             ///< final regularization
  int iterations = 0;
  bool converged = false;
};

/// Observer receives (iteration, adjusted residuals, r_t) each step.
using AMPObserver =
    std::function<void(int, const Eigen::VectorXd&, double)>;

AMPResult amp_fit(const Dataset& ds, double lambda, int max_iter = 1000,
                  double tol = 1e-9, const AMPObserver& observer = nullptr);

struct IRLSResult {
  Eigen::VectorXd theta;
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
};

IRLSResult irls_fit(const Dataset& ds, double lambda, int max_iter = 500,
                    double tol = 1e-10);

enum class Solver { IRLS, AMP };

struct MCSummary {
  long reps = 0;
  long failures = 0;
  double per_coordinate_mse = 0.0;
  double se_estimate = 0.0;
  double mc_std_error = 0.0;
};

/// Independent replications with per-rep counter-derived seed streams;
/// deterministic for a given master seed regardless of thread count.
MCSummary monte_carlo(long n, long p, const Contamination& noise, double lambda,
                      long reps, uint64_t seed, Solver solver = Solver::IRLS,
                      int threads = 0);

}  // namespace huberpl
