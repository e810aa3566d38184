#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "kp2fpu/ansatz.hpp"
#include "kp2fpu/kp2.hpp"
#include "kp2fpu/lattice.hpp"

namespace kp2fpu {
namespace verify {

// ---- residuals of the exact lattice equations at the ansatz ----

struct ResidualFieldsH {
  SpectralField2D u1, u2, w, z;
};
struct ResidualFieldsD {
  SpectralField2D d, x, y, u, v;
};

/// Continuum residual fields, evaluated with exact spectral shifts
/// f(xi +- eps, eta +- eps^2).
ResidualFieldsH residual_fields_horizontal(const ansatz::HorizontalBundle& b,
                                           const ModelParams& p);
ResidualFieldsD residual_fields_diagonal(const ansatz::DiagonalBundle& b, const ModelParams& p);

/// Named l2 norms over the commensurate lattice.
std::vector<std::pair<std::string, double>> residual_norms_horizontal(
    const ansatz::HorizontalBundle& b, const ModelParams& p, const LatticeGrid& lat);
std::vector<std::pair<std::string, double>> residual_norms_diagonal(
    const ansatz::DiagonalBundle& b, const ModelParams& p, const LatticeGrid& lat);

/// Sup norms of the five defining-relation residuals (both frames built from
/// the same A; params must admit the diagonal mode).
struct DefiningResidualSup {
  double wxr, ut, beq, eeq, feq;
};
DefiningResidualSup defining_relation_sup(const SpectralField2D& A, const ModelParams& p,
                                          double eps);

// ---- energy functionals of the perturbations ----

struct SampledAnsatzH {
  lattice::Field A, U, W;  // without the eps^2 amplitude factor
};
struct SampledAnsatzD {
  lattice::Field A, L, D, X, Y, U, V;
};

struct PerturbationsH {
  lattice::Field U1, U2, V1, V2, W, Z;  // (state - eps^2 ansatz)/eps^2
};
struct PerturbationsD {
  lattice::Field L, D, X, Y, U, V;
};

PerturbationsH extract_perturbations(const lattice::StateH& s, const SampledAnsatzH& sa,
                                     double eps);
PerturbationsD extract_perturbations(const lattice::StateD& s, const SampledAnsatzD& sa,
                                     double eps);

double energy_horizontal(const PerturbationsH& pert, const SampledAnsatzH& sa,
                         const ModelParams& p, double eps);
double energy_diagonal(const PerturbationsD& pert, const SampledAnsatzD& sa,
                       const ModelParams& p, double eps);

/// (sum of the six squared l2 perturbation norms) / (2 E); 0 for zero
/// perturbations. flagged = ratio above k0 (or E <= 0 with nonzero data).
struct CoercivityCheck {
  double ratio = 0.0;
  bool flagged = false;
};
CoercivityCheck coercivity_check(const std::vector<const lattice::Field*>& pert_fields,
                                 double energy, double k0);

// ---- convergence fitting ----

struct SlopeFit {
  double slope = 0.0;
  double half_width = 0.0;
};
/// Least squares in log-log coordinates; needs >= 3 strictly positive pairs.
SlopeFit fit_slope(const std::vector<std::pair<double, double>>& eps_norm_pairs);

// ---- sampling-bound table (discrete form of the eps^{-3/2} bound) ----

/// ||sample(U)||_l2 * eps^{3/2} / ||U||_{H^s} on the commensurate lattice
/// nearest to eps (0 for the zero field).
double sampling_ratio(const SpectralField2D& U, double s, double eps);

struct SamplingBoundReport {
  std::vector<double> eps;                   // actual (commensurate) values
  std::vector<std::vector<double>> ratios;   // [sample][eps index]
  double max_ratio = 0.0;
  int trend_violations = 0;
  int trend_pairs = 0;
};
SamplingBoundReport sampling_bound_check(double Lxi, double Leta, int nx, int ny, int mx_max,
                                         int ny_max, double s,
                                         const std::vector<double>& eps_list, int n_samples,
                                         std::uint64_t seed);

// ---- co-evolution of lattice and KP-II ----

struct ComparisonSpec {
  ansatz::Frame frame = ansatz::Frame::horizontal;
  ModelParams params;
  double eps_nominal = 0.2;
  double Lxi = 0.0;          // box; Leta_nominal adjusted to commensurate Leta
  double Leta_nominal = 0.0;
  int solver_neta = 160;     // KP-II transverse grid (<= lattice nk)
  double tau0 = 0.25;
  double dt = 0.0;           // 0 = default
  double dtau = 0.002;
  int observer_stride = 50;
  kp2::PresetSpec preset;
  double coercivity_k0 = 10.0;
};

struct ResolvedGrids {
  double eps = 0.0;
  LatticeGrid lattice;
  Grid2D solver;   // nx = nj, ny = solver_neta
  double Leta = 0.0;
};
ResolvedGrids resolve_grids(double eps_nominal, double Lxi, double Leta_nominal,
                            int solver_neta);

struct Observation {
  double t = 0.0;
  double tau = 0.0;
  // theorem-form components (leading-term comparisons)
  double e_u1 = 0, e_u2 = 0, e_w = 0, e_v1 = 0, e_v2 = 0, e_z = 0;
  // full-ansatz distances
  double a_u1 = 0, a_u2 = 0, a_v1 = 0, a_v2 = 0, a_w = 0, a_z = 0;
  double total_theorem = 0.0;
  double total_ansatz = 0.0;
  double E = 0.0, Q = 0.0, H = 0.0;
  double coercivity = 0.0;
};

struct RunReport {
  ansatz::Frame frame = ansatz::Frame::horizontal;
  double eps_nominal = 0.0, eps = 0.0;
  int nj = 0, nk = 0, solver_ny = 0;
  double Lxi = 0.0, Leta = 0.0;
  double dt = 0.0;
  std::vector<Observation> obs;
  std::vector<std::pair<std::string, double>> residual_norms_t0;
  kp2::SolveDiagnostics kp2_diagnostics;
  double max_Q = 0.0;
  double max_total_theorem = 0.0;
  double max_total_ansatz = 0.0;
  double energy_ratio_max = 0.0;  // max |E'| / (eps^{7/2} sqrt(E) + eps^3 E)
  double coercivity_max = 0.0;
  bool coercivity_flagged = false;
  double hamiltonian_rel_drift = 0.0;
  bool failed = false;
  double failure_time = 0.0;
  std::string failure_reason;
};

RunReport run_comparison(const ComparisonSpec& spec);

/// CSV serialization of the per-observation table, 17 significant digits.
std::string report_csv(const RunReport& r);

}  // namespace verify
}  // namespace kp2fpu
