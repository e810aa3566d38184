#pragma once

#include <array>
#include <string>
#include <vector>

#include "kp2fpu/grid.hpp"
#include "kp2fpu/model_params.hpp"

namespace kp2fpu {
namespace lattice {

using Field = std::vector<double>;

/// Horizontal-frame strain state on a periodic (j,k) lattice:
/// u1 = x_{j+1,k}-x_{j,k}, u2 = x_{j,k+1}-x_{j,k}, v1, v2 likewise for y,
/// w = dx/dt, z = dy/dt.
struct StateH {
  LatticeGrid grid;
  Field u1, u2, v1, v2, w, z;
  double t = 0.0;

  StateH() = default;
  explicit StateH(const LatticeGrid& g)
      : grid(g), u1(g.size()), u2(g.size()), v1(g.size()), v2(g.size()), w(g.size()),
        z(g.size()) {}

  std::array<Field*, 6> fields() { return {&u1, &u2, &v1, &v2, &w, &z}; }
  std::array<const Field*, 6> fields() const { return {&u1, &u2, &v1, &v2, &w, &z}; }
  static const std::array<const char*, 6>& field_names();
};

/// Diagonal-frame strain state on the periodic (m,n) lattice of the diatomic
/// system (x and chi sublattices):
/// al = chi_{m,n}-x_{m,n}, ad = x_{m+1,n+1}-chi_{m,n}, ax = x_{m+1,n}-chi_{m,n},
/// ay = x_{m,n+1}-chi_{m,n}, u = dx/dt, v = dchi/dt.
struct StateD {
  LatticeGrid grid;
  Field al, ad, ax, ay, u, v;
  double t = 0.0;

  StateD() = default;
  explicit StateD(const LatticeGrid& g)
      : grid(g), al(g.size()), ad(g.size()), ax(g.size()), ay(g.size()), u(g.size()),
        v(g.size()) {}

  std::array<Field*, 6> fields() { return {&al, &ad, &ax, &ay, &u, &v}; }
  std::array<const Field*, 6> fields() const { return {&al, &ad, &ax, &ay, &u, &v}; }
  static const std::array<const char*, 6>& field_names();
};

/// Time derivative of the strain system in the horizontal frame, periodic
/// wrap in both indices. Writes into deriv (same grid).
void rhs_horizontal(const StateH& s, const ModelParams& p, StateH& deriv);
StateH rhs_horizontal(const StateH& s, const ModelParams& p);

/// Time derivative in the diagonal frame; requires diagonal-mode parameters.
void rhs_diagonal(const StateD& s, const ModelParams& p, StateD& deriv);
StateD rhs_diagonal(const StateD& s, const ModelParams& p);

/// Total energy in strain variables,
///   H = sum w^2/2 + z^2/2 + V(u1, v1) + V(v2, u2),
/// conserved exactly by the strain flow.
double hamiltonian(const StateH& s, const ModelParams& p);
/// Diagonal-frame conserved energy: sum (u^2+v^2)/2 + Phi(al) + Phi(ad)
/// + Phi(ax) + Psi(ay) with Phi(r) = c1^2 r^2/2 + 2 alpha1 r^3/3 and
/// Psi(r) = c1^2 r^2/2 - 2 alpha1 r^3/3.
double hamiltonian(const StateD& s, const ModelParams& p);

/// One classical RK4 step; throws BlowUpError (stamped with the pre-step
/// time) if non-finite values appear.
void step(StateH& s, const ModelParams& p, double dt);
void step(StateD& s, const ModelParams& p, double dt);

double default_dt(const ModelParams& p);

/// Plain root-sum-of-squares over all sites, no mesh weight, fixed order.
double l2_norm(const Field& f);
double sup_norm(const Field& f);

/// Circular shift: out[j,k] = f[j+dj mod nj, k+dk mod nk].
Field rolled(const Field& f, const LatticeGrid& g, int dj, int dk);

}  // namespace lattice
}  // namespace kp2fpu
