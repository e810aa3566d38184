#pragma once

#include <map>
#include <string>

#include "kp2fpu/kp2.hpp"
#include "kp2fpu/lattice.hpp"
#include "kp2fpu/model_params.hpp"
#include "kp2fpu/spectral_field.hpp"

namespace kp2fpu {
namespace ansatz {

enum class Frame { horizontal, diagonal };

Frame frame_from_string(const std::string& s);
std::string to_string(Frame f);

/// Wave speed of the moving frame xi = eps (j - c t).
double frame_speed(Frame f, const ModelParams& p);

/// A together with its first two tau derivatives, both evaluated through the
/// KP-II equation itself (never finite-differenced in tau).
struct TauFields {
  SpectralField2D A, Adot, Addot;
};
TauFields make_tau_fields(const SpectralField2D& A, const kp2::Coefficients& c);

// --- expansion-field structures (linear in the input field) ---
// velocity-type expansion: -c X + eps (c/2) dxi X + eps^2 (dxi^-1 Xdot
//   - (c/12) dxi^2 X) - eps^3 Xdot / 2
SpectralField2D velocity_expansion(const SpectralField2D& X, const SpectralField2D& Xdot,
                                   double c, double eps);
// transverse-type expansion: eps dxi^-1 deta X - eps^2 deta X / 2
//   + eps^3 (dxi^-1 deta^2 X / 2 + dxi deta X / 12)
SpectralField2D transverse_expansion(const SpectralField2D& X, double eps);

SpectralField2D half_strain_L(const SpectralField2D& X, double eps);
SpectralField2D half_strain_D(const SpectralField2D& X, double eps);
SpectralField2D half_strain_Y(const SpectralField2D& X, double eps);

/// Horizontal-frame expansion fields built from a KP-II solution.
struct HorizontalBundle {
  double eps = 0.0;
  TauFields tau;                      // A, Adot, Addot
  SpectralField2D W, U, Wdot, Udot;   // W_eps, U_eps and their tau derivatives

  std::map<std::string, const SpectralField2D*> fields() const;
};
HorizontalBundle build_horizontal(const SpectralField2D& A, const ModelParams& p, double eps);

SpectralField2D horizontal_W(const SpectralField2D& A, const ModelParams& p, double eps);
SpectralField2D horizontal_U(const SpectralField2D& A, const ModelParams& p, double eps);

/// Diagonal-frame expansion fields (requires diagonal-mode parameters).
struct DiagonalBundle {
  double eps = 0.0;
  TauFields tau;
  SpectralField2D U, L, D, X, Y, V;
  SpectralField2D Udot, Ldot, Ddot, Xdot, Ydot, Vdot;

  std::map<std::string, const SpectralField2D*> fields() const;
};
DiagonalBundle build_diagonal(const SpectralField2D& A, const ModelParams& p, double eps);

/// Evaluates f at the moving-frame lattice points xi = eps (j - c t),
/// eta = eps^2 k by exact spectral interpolation. The lattice and the field's
/// box must be commensurate: nj * eps = Lx and nk * eps^2 = Ly. The eps^2
/// amplitude factor is NOT applied here.
lattice::Field sample_to_lattice(const SpectralField2D& f, double eps, double t, double speed,
                                 const LatticeGrid& lat);

void check_commensurate(const Grid2D& box, double eps, const LatticeGrid& lat);

/// l2 norm over the lattice of the sampled field (spectral Parseval route).
double sampled_l2(const SpectralField2D& f, const LatticeGrid& lat);

/// Lattice state initialized exactly on the full ansatz at t = 0.
lattice::StateH initial_state_horizontal(const HorizontalBundle& b, const ModelParams& p,
                                         const LatticeGrid& lat);
lattice::StateD initial_state_diagonal(const DiagonalBundle& b, const ModelParams& p,
                                       const LatticeGrid& lat);

}  // namespace ansatz
}  // namespace kp2fpu
