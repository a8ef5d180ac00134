#pragma once

#include <cmath>
#include <stdexcept>

namespace huberpl {

/// Error law F = (1-eps) * N(0, sigma_base^2) + eps * H.
enum class NoiseKind {
  None,              ///< eps = 0, purely Gaussian
  SymmetricTwoPoint, ///< H = (delta_mu + delta_{-mu}) / 2
  PointMass,         ///< H = delta_mu
  AtInfinity         ///< improper extremal law, contamination escapes to +-infinity
};

struct Contamination {
  double epsilon = 0.0;
  NoiseKind kind = NoiseKind::None;
  double mu = 0.0;
  double sigma_base = 1.0;

  static Contamination gaussian() { return {}; }
  static Contamination two_point(double eps, double mu) {
    return {eps, NoiseKind::SymmetricTwoPoint, mu, 1.0};
  }
  static Contamination point_mass(double eps, double mu) {
    return {eps, NoiseKind::PointMass, mu, 1.0};
  }
  static Contamination at_infinity(double eps) {
    return {eps, NoiseKind::AtInfinity, 0.0, 1.0};
  }

  bool proper() const { return kind != NoiseKind::AtInfinity; }

  void validate() const {
    if (!(epsilon >= 0.0 && epsilon < 1.0))
      throw std::invalid_argument("contamination fraction must lie in [0,1)");
    if (kind == NoiseKind::None && epsilon != 0.0)
      throw std::invalid_argument("kind None requires epsilon = 0");
    if (!(sigma_base > 0.0) || !std::isfinite(sigma_base))
      throw std::invalid_argument("sigma_base must be positive and finite");
    if ((kind == NoiseKind::SymmetricTwoPoint || kind == NoiseKind::PointMass) &&
        !std::isfinite(mu))
      throw std::invalid_argument("contamination location must be finite");
  }
};

}  // namespace huberpl
