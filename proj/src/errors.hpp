#pragma once

#include <stdexcept>
#include <string>

namespace huberpl {

/// Defining equation has no root (e.g. the slope equation under the
/// extremal law when (1-eps) <= 1/m).
struct NoSolutionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Root/minimum bracket could not be established or verified.
struct BracketError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Generic solver failure (tolerance not met, sanity check failed).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Rank-deficient linear system in IRLS.
struct SingularSystemError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Empirical slope equation infeasible at a given AMP iteration.
struct SlopeInfeasibleError : std::runtime_error {
  int iteration;
  explicit SlopeInfeasibleError(const std::string& msg, int iter = -1)
      : std::runtime_error(msg), iteration(iter) {}
};

}  // namespace huberpl
