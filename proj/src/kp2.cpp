#include "kp2fpu/kp2.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kp2fpu/errors.hpp"

namespace kp2fpu {
namespace kp2 {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
using Complex = std::complex<double>;
}  // namespace

Coefficients Coefficients::horizontal(const ModelParams& p) {
  p.validate();
  return {2.0 * p.c1, p.c1 * p.c1 / 12.0, 2.0 * p.alpha1, p.c2 * p.c2};
}

Coefficients Coefficients::diagonal(const ModelParams& p) {
  p.validate();
  p.require_diagonal_mode();
  const double cs = p.c1 / std::sqrt(2.0);
  return {2.0 * cs, cs * cs / 48.0, p.alpha1, cs * cs};
}

void Coefficients::validate_positive() const {
  if (!(a_t > 0.0) || !(a_4 > 0.0) || !(a_n > 0.0) || !(a_e > 0.0))
    throw ConfigError("Coefficients: all of a_t, a_4, a_n, a_e must be positive");
}

VariableScaling normalize(const Coefficients& c) {
  c.validate_positive();
  // With xi unscaled: tau_s = a_t/a_4, eta_s = sqrt(a_e/a_4), amp = 2 a_4/a_n.
  VariableScaling s;
  s.xi = 1.0;
  s.tau = c.a_t / c.a_4;
  s.eta = std::sqrt(c.a_e / c.a_4);
  s.amplitude = 2.0 * c.a_4 / c.a_n;
  return s;
}

double dispersion_omega(const Coefficients& c, double kx, double ky) {
  if (kx == 0.0) throw ConfigError("dispersion_omega: kx must be nonzero");
  return (c.a_e * ky * ky - c.a_4 * kx * kx * kx * kx) / (c.a_t * kx);
}

SpectralField2D tau_derivative(const SpectralField2D& A, const Coefficients& c) {
  SpectralField2D adv = product(A, A.derivative(1, 0)).zero_mean_projected();
  SpectralField2D out = A.derivative(3, 0);
  out *= c.a_4;
  adv *= c.a_n;
  out += adv;
  out += c.a_e * A.derivative(0, 2).antiderivative_xi(1);
  out *= -1.0 / c.a_t;
  return out;
}

SpectralField2D tau_derivative2(const SpectralField2D& A, const SpectralField2D& Adot,
                                const Coefficients& c) {
  SpectralField2D adv =
      (product(Adot, A.derivative(1, 0)) + product(A, Adot.derivative(1, 0)))
          .zero_mean_projected();
  SpectralField2D out = Adot.derivative(3, 0);
  out *= c.a_4;
  adv *= c.a_n;
  out += adv;
  out += c.a_e * Adot.derivative(0, 2).antiderivative_xi(1);
  out *= -1.0 / c.a_t;
  return out;
}

Complex phi1(Complex z) {
  if (std::abs(z) < 0.5) {
    Complex acc(0.0), pw(1.0);
    double fact = 1.0;
    for (int k = 0; k < 24; ++k) {
      fact *= (k + 1);
      acc += pw / fact;
      pw *= z;
    }
    return acc;
  }
  return (std::exp(z) - 1.0) / z;
}

Complex phi2(Complex z) {
  if (std::abs(z) < 0.5) {
    Complex acc(0.0), pw(1.0);
    double fact = 2.0;
    for (int k = 0; k < 24; ++k) {
      acc += pw / fact;
      fact *= (k + 3);
      pw *= z;
    }
    return acc;
  }
  return (std::exp(z) - 1.0 - z) / (z * z);
}

Complex phi3(Complex z) {
  if (std::abs(z) < 0.5) {
    Complex acc(0.0), pw(1.0);
    double fact = 6.0;
    for (int k = 0; k < 24; ++k) {
      acc += pw / fact;
      fact *= (k + 4);
      pw *= z;
    }
    return acc;
  }
  return (std::exp(z) - 1.0 - z - 0.5 * z * z) / (z * z * z);
}

Stepper::Stepper(const Grid2D& g, const Coefficients& c, double dtau)
    : grid_(g), coeffs_(c), dtau_(dtau) {
  if (!(dtau > 0.0)) throw ConfigError("Stepper: dtau must be positive");
  if (!(c.a_t > 0.0) || !(c.a_4 > 0.0) || c.a_n < 0.0 || !(c.a_e > 0.0))
    throw ConfigError("Stepper: a_t, a_4, a_e must be positive, a_n nonnegative");
  const int cols = g.nx / 2 + 1;
  const long nspec = static_cast<long>(g.ny) * cols;
  E_.resize(nspec);
  E2_.resize(nspec);
  phi_half_.resize(nspec);
  wa_.resize(nspec);
  wb_.resize(nspec);
  wc_.resize(nspec);
  dealias_.resize(nspec);
  ikx_n_.resize(nspec);
  const int mx_cut = g.nx / 3;  // keep |m| <= nx/3 (two-thirds rule)
  const int ny_cut = g.ny / 3;
  for (int n = 0; n < g.ny; ++n) {
    const int sn = (n <= g.ny / 2) ? n : n - g.ny;
    const double ky = kTwoPi * sn / g.Ly;
    for (int m = 0; m < cols; ++m) {
      const long id = static_cast<long>(n) * cols + m;
      const double kx = kTwoPi * m / g.Lx;
      const bool dead = (m == 0) || (m == g.nx / 2) || (n == g.ny / 2);
      if (dead) {
        E_[id] = E2_[id] = phi_half_[id] = wa_[id] = wb_[id] = wc_[id] = 0.0;
        dealias_[id] = 0.0;
        ikx_n_[id] = 0.0;
        continue;
      }
      // d_tau A = L A + N(A),   L = i (a_4 kx^3 - a_e ky^2/kx)/a_t
      const Complex L(0.0, (coeffs_.a_4 * kx * kx * kx - coeffs_.a_e * ky * ky / kx) / coeffs_.a_t);
      const Complex z = dtau * L;
      E_[id] = std::exp(z);
      E2_[id] = std::exp(0.5 * z);
      phi_half_[id] = 0.5 * dtau * phi1(0.5 * z);
      const Complex p1 = phi1(z), p2 = phi2(z), p3 = phi3(z);
      wa_[id] = dtau * (p1 - 3.0 * p2 + 4.0 * p3);
      wb_[id] = dtau * (p2 - 2.0 * p3);
      wc_[id] = dtau * (4.0 * p3 - p2);
      dealias_[id] = (m <= mx_cut && std::abs(sn) <= ny_cut) ? 1.0 : 0.0;
      ikx_n_[id] = Complex(0.0, -coeffs_.a_n / (2.0 * coeffs_.a_t) * kx);
    }
  }
}

void Stepper::nonlinear_term(const SpectralField2D& A, std::vector<Complex>& out) const {
  // N(A)^ = -(a_n / 2 a_t) (i kx) fft((dealias A)^2), dealiased again.
  const auto& spec = A.spectrum();
  const long nspec = static_cast<long>(spec.size());
  std::vector<Complex> tmp(nspec);
  for (long i = 0; i < nspec; ++i) tmp[i] = spec[i] * dealias_[i];
  std::vector<double> real(grid_.size());
  detail::fft_inverse(grid_, tmp.data(), real.data());
  for (double& v : real) v *= v;
  detail::fft_forward(grid_, real.data(), tmp.data());
  out.resize(nspec);
  for (long i = 0; i < nspec; ++i) out[i] = tmp[i] * ikx_n_[i] * dealias_[i];
}

void Stepper::step(SpectralField2D& A, double tau_now) const {
  if (!(A.grid() == grid_)) throw ConfigError("Stepper::step: field grid mismatch");
  const long nspec = static_cast<long>(A.spectrum().size());
  std::vector<Complex> u = A.spectrum();
  for (long i = 0; i < nspec; ++i)
    if (E_[i] == Complex(0.0)) u[i] = 0.0;  // projected modes

  auto wrap = [&](const std::vector<Complex>& s) {
    SpectralField2D f(grid_);
    f.mutable_spectrum() = s;
    return f;
  };

  std::vector<Complex> Nu, Na, Nb, Nc;
  if (nonlinear_) {
    nonlinear_term(wrap(u), Nu);
  } else {
    Nu.assign(nspec, Complex(0.0));
  }

  std::vector<Complex> a(nspec), b(nspec), cst(nspec), un(nspec);
  for (long i = 0; i < nspec; ++i) a[i] = E2_[i] * u[i] + phi_half_[i] * Nu[i];
  if (nonlinear_)
    nonlinear_term(wrap(a), Na);
  else
    Na.assign(nspec, Complex(0.0));
  for (long i = 0; i < nspec; ++i) b[i] = E2_[i] * u[i] + phi_half_[i] * Na[i];
  if (nonlinear_)
    nonlinear_term(wrap(b), Nb);
  else
    Nb.assign(nspec, Complex(0.0));
  for (long i = 0; i < nspec; ++i) cst[i] = E2_[i] * a[i] + phi_half_[i] * (2.0 * Nb[i] - Nu[i]);
  if (nonlinear_)
    nonlinear_term(wrap(cst), Nc);
  else
    Nc.assign(nspec, Complex(0.0));
  for (long i = 0; i < nspec; ++i)
    un[i] = E_[i] * u[i] + wa_[i] * Nu[i] + wb_[i] * 2.0 * (Na[i] + Nb[i]) + wc_[i] * Nc[i];

  for (const Complex& c : un)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw BlowUpError("kp2 step produced non-finite modes (last valid tau = " +
                            std::to_string(tau_now) + ")",
                        tau_now);
  A.mutable_spectrum() = std::move(un);
}

HypothesisReport check_data_hypotheses(const SpectralField2D& A0, double tol) {
  HypothesisReport r;
  const double sup = std::max(A0.sup_norm(), 1e-300);
  r.zero_mean_rel = A0.xi_mean_magnitude() / sup;
  if (r.zero_mean_rel > 1e-10) {
    r.failure = "initial data violates the zero-mass constraint: xi-mean content " +
                std::to_string(r.zero_mean_rel) + " (relative to sup) exceeds 1e-10";
    return r;
  }
  SpectralField2D a0 = A0.zero_mean_projected();
  r.norm_a0_h9 = a0.hs_norm(9.0);
  SpectralField2D D = a0.derivative(0, 2).antiderivative_xi(2);
  r.norm_dxim2_deta2_h9 = D.hs_norm(9.0);
  SpectralField2D bracket =
      (D + product(a0, a0)).derivative(0, 2).zero_mean_projected().antiderivative_xi(1);
  r.norm_bracket_h3 = bracket.hs_norm(3.0);
  struct Item {
    const char* name;
    double value;
  };
  const Item items[] = {{"H9 norm of A0", r.norm_a0_h9},
                        {"H9 norm of dxi^-2 deta^2 A0", r.norm_dxim2_deta2_h9},
                        {"H3 norm of dxi^-1 deta^2 [dxi^-2 deta^2 A0 + A0^2]", r.norm_bracket_h3}};
  for (const Item& it : items) {
    if (!std::isfinite(it.value) || it.value > tol) {
      r.failure = std::string("initial data rejected: ") + it.name + " = " +
                  std::to_string(it.value) + " exceeds " + std::to_string(tol);
      return r;
    }
  }
  r.admissible = true;
  return r;
}

namespace {

void advance(SpectralField2D& A, const Coefficients& c, double& tau, double tau_to,
             double dtau_target, SolveDiagnostics& diag, double l2_initial,
             std::optional<Stepper>& stepper) {
  const double span = tau_to - tau;
  if (span <= 1e-15) return;
  const int n = std::max(1, static_cast<int>(std::ceil(span / dtau_target - 1e-9)));
  const double sub = span / n;
  if (!stepper || std::abs(stepper->dtau() - sub) > 1e-15 * std::max(1.0, sub))
    stepper.emplace(A.grid(), c, sub);
  for (int i = 0; i < n; ++i) {
    stepper->step(A, tau);
    tau += sub;
  }
  const double l2 = A.l2_grid_norm();
  if (l2_initial > 0.0)
    diag.l2_max_rel_drift =
        std::max(diag.l2_max_rel_drift, std::abs(l2 - l2_initial) / l2_initial);
  diag.l2_final = l2;
  diag.max_zero_mode_rel = std::max(
      diag.max_zero_mode_rel, A.xi_mean_magnitude() / std::max(A.sup_norm(), 1e-300));
}

}  // namespace

Trajectory solve(const SpectralField2D& A0, const Coefficients& c, double tau_end, double dtau,
                 const std::vector<double>& observe_at, bool check_hypotheses) {
  if (!(tau_end >= 0.0)) throw ConfigError("solve: tau_end must be nonnegative");
  if (check_hypotheses) {
    HypothesisReport rep = check_data_hypotheses(A0);
    if (!rep.admissible) throw ConstraintError(rep.failure);
  }
  std::vector<double> times = observe_at;
  times.push_back(0.0);
  times.push_back(tau_end);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-12; }),
              times.end());

  Trajectory traj;
  SpectralField2D A = A0.zero_mean_projected();
  traj.diagnostics.l2_initial = A.l2_grid_norm();
  traj.diagnostics.l2_final = traj.diagnostics.l2_initial;
  double tau = 0.0;
  std::optional<Stepper> stepper;
  for (double t : times) {
    if (t < -1e-12 || t > tau_end + 1e-12) throw ConfigError("solve: observation time out of range");
    advance(A, c, tau, t, dtau, traj.diagnostics, traj.diagnostics.l2_initial, stepper);
    traj.snapshots.push_back({tau, A});
  }
  return traj;
}

Evolver::Evolver(SpectralField2D A0, const Coefficients& c, double dtau_target)
    : A_(A0.zero_mean_projected()), coeffs_(c), dtau_target_(dtau_target) {
  l2_initial_ = A_.l2_grid_norm();
  diag_.l2_initial = l2_initial_;
  diag_.l2_final = l2_initial_;
}

const SpectralField2D& Evolver::advance_to(double tau) {
  if (tau < tau_ - 1e-12) throw ConfigError("Evolver: cannot integrate backwards");
  advance(A_, coeffs_, tau_, tau, dtau_target_, diag_, l2_initial_, stepper_);
  return A_;
}

SpectralField2D make_initial_data(const Grid2D& g, const PresetSpec& spec,
                                  const Coefficients& c) {
  if (spec.name == "zero") return SpectralField2D(g);
  if (spec.name == "line-soliton" || spec.name == "perturbed-line-soliton") {
    if (!(spec.kappa > 0.0)) throw ConfigError("soliton preset: kappa must be positive");
    const double a =
        (spec.amplitude != 0.0) ? spec.amplitude : 12.0 * c.a_4 * spec.kappa * spec.kappa / c.a_n;
    const double x0 = 0.5 * g.Lx;
    const bool perturbed = (spec.name == "perturbed-line-soliton");
    const double delta = perturbed ? spec.delta : 0.0;
    SpectralField2D f = SpectralField2D::from_function(g, [&](double x, double y) {
      double s = 0.0;
      for (int q = -1; q <= 1; ++q) {
        const double arg = spec.kappa * (x - x0 - q * g.Lx);
        const double c0 = std::cosh(arg);
        s += a / (c0 * c0);
      }
      return s * (1.0 + delta * std::cos(kTwoPi * y / g.Ly));
    });
    return f.zero_mean_projected();
  }
  if (spec.name == "gaussian-zero-mean") {
    if (!(spec.sigma_xi > 0.0) || !(spec.sigma_eta > 0.0))
      throw ConfigError("gaussian preset: widths must be positive");
    const double amp = (spec.amplitude != 0.0) ? spec.amplitude : 1.0;
    const double x0 = 0.5 * g.Lx, y0 = 0.5 * g.Ly;
    const double sx2 = spec.sigma_xi * spec.sigma_xi;
    const double sy2 = spec.sigma_eta * spec.sigma_eta;
    // second xi-derivative of a periodized gaussian bump; the image sums keep
    // the field smooth across the periodic seams
    SpectralField2D f = SpectralField2D::from_function(g, [&](double x, double y) {
      double s = 0.0;
      for (int qx = -1; qx <= 1; ++qx)
        for (int qy = -2; qy <= 2; ++qy) {
          const double dx = x - x0 - qx * g.Lx, dy = y - y0 - qy * g.Ly;
          const double gauss = std::exp(-0.5 * dx * dx / sx2 - 0.5 * dy * dy / sy2);
          s += (dx * dx / (sx2 * sx2) - 1.0 / sx2) * gauss;
        }
      return amp * s;
    });
    return f.zero_mean_projected();
  }
  throw ConfigError("unknown initial-data preset: " + spec.name);
}

double soliton_speed(const Grid2D& g, const PresetSpec& spec, const Coefficients& c) {
  const double a =
      (spec.amplitude != 0.0) ? spec.amplitude : 12.0 * c.a_4 * spec.kappa * spec.kappa / c.a_n;
  const double mean = 2.0 * a / (spec.kappa * g.Lx);
  return 4.0 * (c.a_4 / c.a_t) * spec.kappa * spec.kappa - (c.a_n / c.a_t) * mean;
}

}  // namespace kp2
}  // namespace kp2fpu
