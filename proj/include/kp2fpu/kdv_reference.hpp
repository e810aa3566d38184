#pragma once

#include <vector>

#include "kp2fpu/kp2.hpp"

namespace kp2fpu {
namespace kdv1d {

/// Reference solve of the eta-independent reduction
///   d_tau u + (a_4/a_t) d_xi^3 u + (a_n/a_t) u d_xi u = 0
/// on [0, L) with n points, by an integrating-factor classical RK4 in
/// Fourier space (a scheme family distinct from the 2D stepper). Returns
/// u(tau_end).
std::vector<double> integrate(const std::vector<double>& u0, double L,
                              const kp2::Coefficients& c, double tau_end, int nsteps);

}  // namespace kdv1d
}  // namespace kp2fpu
