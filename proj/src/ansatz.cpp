#include "kp2fpu/ansatz.hpp"

#include <cmath>

#include "kp2fpu/errors.hpp"

namespace kp2fpu {
namespace ansatz {

Frame frame_from_string(const std::string& s) {
  if (s == "horizontal") return Frame::horizontal;
  if (s == "diagonal") return Frame::diagonal;
  throw ConfigError("frame must be 'horizontal' or 'diagonal', got '" + s + "'");
}

std::string to_string(Frame f) { return f == Frame::horizontal ? "horizontal" : "diagonal"; }

double frame_speed(Frame f, const ModelParams& p) {
  return f == Frame::horizontal ? p.c1 : p.c1 / std::sqrt(2.0);
}

TauFields make_tau_fields(const SpectralField2D& A, const kp2::Coefficients& c) {
  TauFields t;
  t.A = A.zero_mean_projected();
  t.Adot = kp2::tau_derivative(t.A, c);
  t.Addot = kp2::tau_derivative2(t.A, t.Adot, c);
  return t;
}

SpectralField2D velocity_expansion(const SpectralField2D& X, const SpectralField2D& Xdot,
                                   double c, double eps) {
  SpectralField2D out = (-c) * X;
  out += (eps * c / 2.0) * X.derivative(1, 0);
  out += (eps * eps) * (Xdot.antiderivative_xi(1) - (c / 12.0) * X.derivative(2, 0));
  out -= (eps * eps * eps / 2.0) * Xdot;
  return out;
}

SpectralField2D transverse_expansion(const SpectralField2D& X, double eps) {
  SpectralField2D out = eps * X.derivative(0, 1).antiderivative_xi(1);
  out -= (eps * eps / 2.0) * X.derivative(0, 1);
  out += (eps * eps * eps) * (0.5 * X.derivative(0, 2).antiderivative_xi(1) +
                              (1.0 / 12.0) * X.derivative(1, 1));
  return out;
}

SpectralField2D half_strain_L(const SpectralField2D& X, double eps) {
  SpectralField2D out = 0.5 * X;
  out += eps * (0.5 * X.derivative(0, 1).antiderivative_xi(1) - 0.125 * X.derivative(1, 0));
  out += (eps * eps * eps) *
         (0.125 * X.derivative(0, 2).antiderivative_xi(1) +
          (1.0 / 384.0) * X.derivative(3, 0) - (1.0 / 48.0) * X.derivative(1, 1));
  return out;
}

SpectralField2D half_strain_D(const SpectralField2D& X, double eps) {
  SpectralField2D out = 0.5 * X;
  out += eps * (0.5 * X.derivative(0, 1).antiderivative_xi(1) + 0.125 * X.derivative(1, 0));
  out += (eps * eps / 2.0) * X.derivative(0, 1);
  out += (eps * eps * eps) *
         (0.375 * X.derivative(0, 2).antiderivative_xi(1) -
          (1.0 / 384.0) * X.derivative(3, 0) + (5.0 / 48.0) * X.derivative(1, 1));
  return out;
}

SpectralField2D half_strain_Y(const SpectralField2D& X, double eps) {
  SpectralField2D out = (-0.5) * X;
  out += eps * (0.5 * X.derivative(0, 1).antiderivative_xi(1) + 0.125 * X.derivative(1, 0));
  out -= (eps * eps / 2.0) * X.derivative(0, 1);
  out += (eps * eps * eps) *
         (0.375 * X.derivative(0, 2).antiderivative_xi(1) -
          (1.0 / 384.0) * X.derivative(3, 0) + (5.0 / 48.0) * X.derivative(1, 1));
  return out;
}

std::map<std::string, const SpectralField2D*> HorizontalBundle::fields() const {
  return {{"A", &tau.A}, {"W_eps", &W}, {"U_eps", &U}};
}

HorizontalBundle build_horizontal(const SpectralField2D& A, const ModelParams& p, double eps) {
  p.validate();
  if (!(eps > 0.0)) throw ConfigError("build_horizontal: eps must be positive");
  const kp2::Coefficients c = kp2::Coefficients::horizontal(p);
  HorizontalBundle b;
  b.eps = eps;
  b.tau = make_tau_fields(A, c);
  b.W = velocity_expansion(b.tau.A, b.tau.Adot, p.c1, eps);
  b.Wdot = velocity_expansion(b.tau.Adot, b.tau.Addot, p.c1, eps);
  b.U = transverse_expansion(b.tau.A, eps);
  b.Udot = transverse_expansion(b.tau.Adot, eps);
  return b;
}

SpectralField2D horizontal_W(const SpectralField2D& A, const ModelParams& p, double eps) {
  const kp2::Coefficients c = kp2::Coefficients::horizontal(p);
  TauFields t = make_tau_fields(A, c);
  return velocity_expansion(t.A, t.Adot, p.c1, eps);
}

SpectralField2D horizontal_U(const SpectralField2D& A, const ModelParams& p, double eps) {
  const kp2::Coefficients c = kp2::Coefficients::horizontal(p);
  TauFields t = make_tau_fields(A, c);
  return transverse_expansion(t.A, eps);
}

std::map<std::string, const SpectralField2D*> DiagonalBundle::fields() const {
  return {{"A", &tau.A}, {"L_eps", &L}, {"D_eps", &D}, {"X_eps", &X},
          {"Y_eps", &Y}, {"U_eps", &U}, {"V_eps", &V}};
}

DiagonalBundle build_diagonal(const SpectralField2D& A, const ModelParams& p, double eps) {
  p.validate();
  p.require_diagonal_mode();
  if (!(eps > 0.0)) throw ConfigError("build_diagonal: eps must be positive");
  const kp2::Coefficients c = kp2::Coefficients::diagonal(p);
  const double cs = p.c1 / std::sqrt(2.0);
  DiagonalBundle b;
  b.eps = eps;
  b.tau = make_tau_fields(A, c);
  b.U = velocity_expansion(b.tau.A, b.tau.Adot, cs, eps);
  b.Udot = velocity_expansion(b.tau.Adot, b.tau.Addot, cs, eps);
  b.L = half_strain_L(b.tau.A, eps);
  b.Ldot = half_strain_L(b.tau.Adot, eps);
  b.D = half_strain_D(b.tau.A, eps);
  b.Ddot = half_strain_D(b.tau.Adot, eps);
  b.Y = half_strain_Y(b.tau.A, eps);
  b.Ydot = half_strain_Y(b.tau.Adot, eps);
  b.X = b.tau.A - b.L;      // X_eps + L_eps = A by construction
  b.Xdot = b.tau.Adot - b.Ldot;
  // V_eps - U_eps = -eps c* dxi L_eps + eps^3 dtau L_eps
  b.V = b.U - (eps * cs) * b.L.derivative(1, 0) + (eps * eps * eps) * b.Ldot;
  b.Vdot = b.Udot - (eps * cs) * b.Ldot.derivative(1, 0) +
           (eps * eps * eps) * half_strain_L(b.tau.Addot, eps);
  return b;
}

void check_commensurate(const Grid2D& box, double eps, const LatticeGrid& lat) {
  const double ex = lat.nj * eps;
  const double ey = lat.nk * eps * eps;
  if (std::abs(ex - box.Lx) > 1e-9 * box.Lx || std::abs(ey - box.Ly) > 1e-9 * box.Ly)
    throw ConfigError("lattice and box are incommensurate: nj*eps = " + std::to_string(ex) +
                      " vs Lxi = " + std::to_string(box.Lx) + ", nk*eps^2 = " +
                      std::to_string(ey) + " vs Leta = " + std::to_string(box.Ly));
  if (lat.nj < box.nx || lat.nk < box.ny)
    throw ConfigError("lattice coarser than the field grid; sampling would alias");
}

lattice::Field sample_to_lattice(const SpectralField2D& f, double eps, double t, double speed,
                                 const LatticeGrid& lat) {
  check_commensurate(f.grid(), eps, lat);
  SpectralField2D g = f.shifted(-eps * speed * t, 0.0);
  const Grid2D target(lat.nj, lat.nk, f.grid().Lx, f.grid().Ly);
  if (!(target == f.grid())) g = g.resampled(target);
  return g.values();
}

double sampled_l2(const SpectralField2D& f, const LatticeGrid& lat) {
  check_commensurate(f.grid(), static_cast<double>(f.grid().Lx) / lat.nj, lat);
  return f.sampled_lattice_l2(lat);
}

lattice::StateH initial_state_horizontal(const HorizontalBundle& b, const ModelParams& p,
                                         const LatticeGrid& lat) {
  const double e2 = b.eps * b.eps;
  lattice::StateH s(lat);
  s.u1 = sample_to_lattice(b.tau.A, b.eps, 0.0, p.c1, lat);
  s.u2 = sample_to_lattice(b.U, b.eps, 0.0, p.c1, lat);
  s.w = sample_to_lattice(b.W, b.eps, 0.0, p.c1, lat);
  for (auto* f : {&s.u1, &s.u2, &s.w})
    for (double& v : *f) v *= e2;
  s.t = 0.0;
  return s;
}

lattice::StateD initial_state_diagonal(const DiagonalBundle& b, const ModelParams& p,
                                       const LatticeGrid& lat) {
  const double e2 = b.eps * b.eps;
  const double cs = p.c1 / std::sqrt(2.0);
  lattice::StateD s(lat);
  s.al = sample_to_lattice(b.L, b.eps, 0.0, cs, lat);
  s.ad = sample_to_lattice(b.D, b.eps, 0.0, cs, lat);
  s.ax = sample_to_lattice(b.X, b.eps, 0.0, cs, lat);
  s.ay = sample_to_lattice(b.Y, b.eps, 0.0, cs, lat);
  s.u = sample_to_lattice(b.U, b.eps, 0.0, cs, lat);
  s.v = sample_to_lattice(b.V, b.eps, 0.0, cs, lat);
  for (auto* f : s.fields())
    for (double& v : *f) v *= e2;
  s.t = 0.0;
  return s;
}

}  // namespace ansatz
}  // namespace kp2fpu
