#pragma once

#include <cmath>

#include "kp2fpu/errors.hpp"

namespace kp2fpu {

/// Spring constants of the quadratic/cubic interaction potential
/// V(r,s) = (c1^2 r^2 + c2^2 s^2)/2 + alpha1 r^3/3 + alpha2 r s^2/2.
/// The diagonal-frame wave speeds are derived, never stored.
struct ModelParams {
  double c1 = 1.0;
  double c2 = 1.0;
  double alpha1 = 1.0;
  double alpha2 = 2.0;

  void validate() const {
    if (!(c1 > 0.0) || !(c2 > 0.0)) throw ConfigError("ModelParams: c1, c2 must be positive");
  }

  double c1_star() const { return 0.5 * std::sqrt(c1 * c1 + c2 * c2); }
  double c2_star() const { return 0.5 * std::sqrt(std::max(0.0, c1 * c1 - c2 * c2)); }

  // Diagonal propagation requires c2 = c1 and alpha2 = 2*alpha1 (then the
  // lattice admits the x = y reduction and c2_star = 0).
  bool diagonal_mode() const {
    const double tol = 1e-12;
    return std::abs(c2 - c1) <= tol * std::abs(c1) &&
           std::abs(alpha2 - 2.0 * alpha1) <= tol * std::max(1.0, std::abs(alpha1));
  }

  void require_diagonal_mode() const {
    if (!diagonal_mode())
      throw ConfigError("diagonal frame requires c2 = c1 and alpha2 = 2*alpha1");
  }
};

}  // namespace kp2fpu
