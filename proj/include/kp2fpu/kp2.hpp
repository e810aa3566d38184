#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kp2fpu/model_params.hpp"
#include "kp2fpu/spectral_field.hpp"

namespace kp2fpu {
namespace kp2 {

/// Coefficients of  a_t d_xi d_tau A + a_4 d_xi^4 A + a_n d_xi(A d_xi A)
///                  + a_e d_eta^2 A = 0.
/// The normalized equation d_tau A + d_xi(A^2) + d_xi^3 A + d_xi^{-1} d_eta^2 A = 0
/// corresponds to (1, 1, 2, 1) in this convention.
struct Coefficients {
  double a_t = 1.0;
  double a_4 = 1.0;
  double a_n = 2.0;
  double a_e = 1.0;

  static Coefficients normalized() { return {1.0, 1.0, 2.0, 1.0}; }
  /// Horizontal propagation: 2 c1, c1^2/12, 2 alpha1, c2^2.
  static Coefficients horizontal(const ModelParams& p);
  /// Diagonal propagation (c2 = c1, alpha2 = 2 alpha1):
  /// 2 c1*, (c1*)^2/48, alpha1, (c1*)^2 with c1* = c1/sqrt(2).
  static Coefficients diagonal(const ModelParams& p);

  void validate_positive() const;
};

/// Change of variables A(xi, eta, tau) = amplitude * B(xi/xi_s, eta/eta_s,
/// tau/tau_s) mapping a solution B of the normalized equation to a solution A
/// of the given coefficients.
struct VariableScaling {
  double xi = 1.0;
  double eta = 1.0;
  double tau = 1.0;
  double amplitude = 1.0;

  VariableScaling inverse() const { return {1.0 / xi, 1.0 / eta, 1.0 / tau, 1.0 / amplitude}; }
  VariableScaling compose(const VariableScaling& o) const {
    return {xi * o.xi, eta * o.eta, tau * o.tau, amplitude * o.amplitude};
  }
};

/// Scaling onto the normalized form (keeps xi unscaled).
VariableScaling normalize(const Coefficients& c);

/// Linear dispersion omega(kx, ky) of a_t kx w + a_4 kx^4 - a_e ky^2 = 0.
double dispersion_omega(const Coefficients& c, double kx, double ky);

/// d_tau A from the equation itself:
///   d_tau A = -(a_4 d_xi^3 A + a_n P0(A d_xi A) + a_e d_xi^{-1} d_eta^2 A)/a_t.
SpectralField2D tau_derivative(const SpectralField2D& A, const Coefficients& c);
/// d_tau^2 A by differentiating the equation, given Adot = tau_derivative(A).
SpectralField2D tau_derivative2(const SpectralField2D& A, const SpectralField2D& Adot,
                                const Coefficients& c);

/// ETDRK4 stepper with precomputed exponential weights. The kxi = 0 plane is
/// projected out (the linear symbol is singular there); the two-thirds rule
/// dealiases the quadratic term.
class Stepper {
 public:
  Stepper(const Grid2D& g, const Coefficients& c, double dtau);

  double dtau() const { return dtau_; }
  const Coefficients& coefficients() const { return coeffs_; }

  /// One step. Throws BlowUpError with the last valid tau on non-finite modes.
  void step(SpectralField2D& A, double tau_now) const;

  /// Testing/diagnostics hook: drop the quadratic term.
  void set_nonlinear_enabled(bool on) { nonlinear_ = on; }

 private:
  Grid2D grid_;
  Coefficients coeffs_;
  double dtau_;
  bool nonlinear_ = true;
  std::vector<std::complex<double>> E_, E2_, phi_half_, wa_, wb_, wc_;
  std::vector<double> dealias_;
  std::vector<std::complex<double>> ikx_n_;
  void nonlinear_term(const SpectralField2D& A, std::vector<std::complex<double>>& out) const;
};

/// phi-functions (exp(z)-1)/z, ... with Taylor-series fallback near z = 0.
std::complex<double> phi1(std::complex<double> z);
std::complex<double> phi2(std::complex<double> z);
std::complex<double> phi3(std::complex<double> z);

struct Snapshot {
  double tau;
  SpectralField2D A;
};

struct SolveDiagnostics {
  double l2_initial = 0.0;
  double l2_final = 0.0;
  double l2_max_rel_drift = 0.0;
  double max_zero_mode_rel = 0.0;  // max |kxi=0 coefficient| / sup|A| seen
};

struct HypothesisReport {
  // Discrete finiteness check of the well-posedness data requirements:
  // H^{s+9} norms of A0 and d_xi^{-2} d_eta^2 A0, and the H^{s+3} norm of
  // d_xi^{-1} d_eta^2 [d_xi^{-2} d_eta^2 A0 + A0^2], with s = 0.
  double norm_a0_h9 = 0.0;
  double norm_dxim2_deta2_h9 = 0.0;
  double norm_bracket_h3 = 0.0;
  double zero_mean_rel = 0.0;
  bool admissible = false;
  std::string failure;
};

HypothesisReport check_data_hypotheses(const SpectralField2D& A0, double tol = 1e8);

struct Trajectory {
  std::vector<Snapshot> snapshots;
  SolveDiagnostics diagnostics;
};

/// Integrates from tau = 0 to tau_end, storing snapshots at the requested
/// times (ascending; 0 and tau_end included automatically). The step size is
/// reduced per interval so that observation times are hit exactly.
Trajectory solve(const SpectralField2D& A0, const Coefficients& c, double tau_end, double dtau,
                 const std::vector<double>& observe_at, bool check_hypotheses = true);

/// Streaming co-evolution driver: advances an owned field to successive
/// observation times without storing a trajectory.
class Evolver {
 public:
  Evolver(SpectralField2D A0, const Coefficients& c, double dtau_target);
  const SpectralField2D& advance_to(double tau);
  const SpectralField2D& current() const { return A_; }
  double tau() const { return tau_; }
  const SolveDiagnostics& diagnostics() const { return diag_; }

 private:
  SpectralField2D A_;
  Coefficients coeffs_;
  double dtau_target_;
  double tau_ = 0.0;
  double l2_initial_;
  SolveDiagnostics diag_;
  std::optional<Stepper> stepper_;
};

// ---- initial data presets ----

struct PresetSpec {
  std::string name = "gaussian-zero-mean";  // zero | line-soliton |
                                            // perturbed-line-soliton | gaussian-zero-mean
  double amplitude = 0.0;  // 0 = derive from coefficients (soliton) or 1.0 (gaussian)
  double kappa = 0.5;      // soliton inverse width
  double delta = 0.2;      // transverse modulation amplitude (perturbed soliton)
  double sigma_xi = 3.0;   // gaussian widths
  double sigma_eta = 6.0;
  std::uint64_t seed = 0;  // reserved for randomized variants
};

/// Builds the preset on the grid, zero-mean projected. Solitons are exact
/// traveling waves of the eta-independent reduction of the given coefficients
/// (before the zero-mean projection, which only shifts the frame speed).
SpectralField2D make_initial_data(const Grid2D& g, const PresetSpec& spec,
                                  const Coefficients& c);

/// Speed of the sech^2 soliton of the eta-independent reduction, including
/// the frame shift from the zero-mean projection of this preset.
double soliton_speed(const Grid2D& g, const PresetSpec& spec, const Coefficients& c);

}  // namespace kp2
}  // namespace kp2fpu
