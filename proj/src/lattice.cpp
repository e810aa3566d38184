#include "kp2fpu/lattice.hpp"

#include <cmath>

#include "kp2fpu/errors.hpp"
#include "kp2fpu/parallel.hpp"

namespace kp2fpu {
namespace lattice {

namespace {

void check_state_dims(long grid_size, std::array<const Field*, 6> fields, const char* who) {
  for (const Field* f : fields)
    if (static_cast<long>(f->size()) != grid_size)
      throw ConfigError(std::string(who) + ": field size does not match grid");
}

template <typename State>
bool finite(const State& s) {
  for (const Field* f : s.fields())
    for (double v : *f)
      if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

const std::array<const char*, 6>& StateH::field_names() {
  static const std::array<const char*, 6> names = {"u1", "u2", "v1", "v2", "w", "z"};
  return names;
}

const std::array<const char*, 6>& StateD::field_names() {
  static const std::array<const char*, 6> names = {"al", "ad", "ax", "ay", "u", "v"};
  return names;
}

void rhs_horizontal(const StateH& s, const ModelParams& p, StateH& deriv) {
  p.validate();
  check_state_dims(s.grid.size(), s.fields(), "rhs_horizontal");
  if (!(deriv.grid == s.grid)) deriv = StateH(s.grid);
  const int nj = s.grid.nj, nk = s.grid.nk;
  const double c1s = p.c1 * p.c1, c2s = p.c2 * p.c2;
  const double a1 = p.alpha1, a2 = p.alpha2;
  const double* u1 = s.u1.data();
  const double* u2 = s.u2.data();
  const double* v1 = s.v1.data();
  const double* v2 = s.v2.data();
  const double* w = s.w.data();
  const double* z = s.z.data();
  double* du1 = deriv.u1.data();
  double* du2 = deriv.u2.data();
  double* dv1 = deriv.v1.data();
  double* dv2 = deriv.v2.data();
  double* dw = deriv.w.data();
  double* dz = deriv.z.data();

  parallel_for(0, nk, [&](long k0, long k1) {
    for (long k = k0; k < k1; ++k) {
      const long row = k * nj;
      const long rowp = ((k + 1 == nk) ? 0 : k + 1) * nj;
      const long rowm = ((k == 0) ? nk - 1 : k - 1) * nj;
      for (int j = 0; j < nj; ++j) {
        const int jp = (j + 1 == nj) ? 0 : j + 1;
        const int jm = (j == 0) ? nj - 1 : j - 1;
        const long id = row + j;
        du1[id] = w[row + jp] - w[id];
        du2[id] = w[rowp + j] - w[id];
        dv1[id] = z[row + jp] - z[id];
        dv2[id] = z[rowp + j] - z[id];
        const long idw = row + jm;   // (j-1, k)
        const long ids = rowm + j;   // (j, k-1)
        dw[id] = c1s * (u1[id] - u1[idw]) + c2s * (u2[id] - u2[ids]) +
                 a1 * (u1[id] * u1[id] - u1[idw] * u1[idw]) +
                 a2 * (u2[id] * v2[id] - u2[ids] * v2[ids] +
                       0.5 * (v1[id] * v1[id] - v1[idw] * v1[idw]));
        dz[id] = c1s * (v2[id] - v2[ids]) + c2s * (v1[id] - v1[idw]) +
                 a1 * (v2[id] * v2[id] - v2[ids] * v2[ids]) +
                 a2 * (u1[id] * v1[id] - u1[idw] * v1[idw] +
                       0.5 * (u2[id] * u2[id] - u2[ids] * u2[ids]));
      }
    }
  });
  deriv.t = 1.0;
}

StateH rhs_horizontal(const StateH& s, const ModelParams& p) {
  StateH d(s.grid);
  rhs_horizontal(s, p, d);
  return d;
}

void rhs_diagonal(const StateD& s, const ModelParams& p, StateD& deriv) {
  p.validate();
  p.require_diagonal_mode();
  check_state_dims(s.grid.size(), s.fields(), "rhs_diagonal");
  if (!(deriv.grid == s.grid)) deriv = StateD(s.grid);
  const int nm = s.grid.nj, nn = s.grid.nk;
  const double c1s = p.c1 * p.c1;
  const double a1 = 2.0 * p.alpha1;
  const double* al = s.al.data();
  const double* ad = s.ad.data();
  const double* ax = s.ax.data();
  const double* ay = s.ay.data();
  const double* u = s.u.data();
  const double* v = s.v.data();
  double* dal = deriv.al.data();
  double* dad = deriv.ad.data();
  double* dax = deriv.ax.data();
  double* day = deriv.ay.data();
  double* du = deriv.u.data();
  double* dv = deriv.v.data();

  parallel_for(0, nn, [&](long n0, long n1) {
    for (long n = n0; n < n1; ++n) {
      const long row = n * nm;
      const long rowp = ((n + 1 == nn) ? 0 : n + 1) * nm;
      const long rowm = ((n == 0) ? nn - 1 : n - 1) * nm;
      for (int m = 0; m < nm; ++m) {
        const int mp = (m + 1 == nm) ? 0 : m + 1;
        const int mm = (m == 0) ? nm - 1 : m - 1;
        const long id = row + m;
        dal[id] = v[id] - u[id];
        dad[id] = u[rowp + mp] - v[id];
        dax[id] = u[row + mp] - v[id];
        day[id] = u[rowp + m] - v[id];
        const long idd = rowm + mm;  // (m-1, n-1)
        const long idx = row + mm;   // (m-1, n)
        const long idy = rowm + m;   // (m, n-1)
        du[id] = c1s * (al[id] - ad[idd] - ax[idx] - ay[idy]) +
                 a1 * (al[id] * al[id] - ad[idd] * ad[idd] - ax[idx] * ax[idx] +
                       ay[idy] * ay[idy]);
        dv[id] = c1s * (ad[id] - al[id] + ax[id] + ay[id]) +
                 a1 * (ad[id] * ad[id] - al[id] * al[id] + ax[id] * ax[id] -
                       ay[id] * ay[id]);
      }
    }
  });
  deriv.t = 1.0;
}

StateD rhs_diagonal(const StateD& s, const ModelParams& p) {
  StateD d(s.grid);
  rhs_diagonal(s, p, d);
  return d;
}

double hamiltonian(const StateH& s, const ModelParams& p) {
  p.validate();
  check_state_dims(s.grid.size(), s.fields(), "hamiltonian");
  const double c1s = p.c1 * p.c1, c2s = p.c2 * p.c2;
  double acc = 0.0;
  const long n = s.grid.size();
  for (long i = 0; i < n; ++i) {
    const double r1 = s.u1[i], s1 = s.v1[i];   // horizontal spring
    const double r2 = s.v2[i], s2 = s.u2[i];   // vertical spring
    acc += 0.5 * (s.w[i] * s.w[i] + s.z[i] * s.z[i]);
    acc += 0.5 * (c1s * r1 * r1 + c2s * s1 * s1) + p.alpha1 * r1 * r1 * r1 / 3.0 +
           0.5 * p.alpha2 * r1 * s1 * s1;
    acc += 0.5 * (c1s * r2 * r2 + c2s * s2 * s2) + p.alpha1 * r2 * r2 * r2 / 3.0 +
           0.5 * p.alpha2 * r2 * s2 * s2;
  }
  return acc;
}

double hamiltonian(const StateD& s, const ModelParams& p) {
  p.validate();
  p.require_diagonal_mode();
  check_state_dims(s.grid.size(), s.fields(), "hamiltonian");
  const double c1s = p.c1 * p.c1;
  const double cub = 2.0 * p.alpha1 / 3.0;
  double acc = 0.0;
  const long n = s.grid.size();
  for (long i = 0; i < n; ++i) {
    acc += 0.5 * (s.u[i] * s.u[i] + s.v[i] * s.v[i]);
    acc += 0.5 * c1s * (s.al[i] * s.al[i] + s.ad[i] * s.ad[i] + s.ax[i] * s.ax[i] +
                        s.ay[i] * s.ay[i]);
    acc += cub * (s.al[i] * s.al[i] * s.al[i] + s.ad[i] * s.ad[i] * s.ad[i] +
                  s.ax[i] * s.ax[i] * s.ax[i] - s.ay[i] * s.ay[i] * s.ay[i]);
  }
  return acc;
}

namespace {

// y += a*x over all six fields
template <typename State>
void axpy(State& y, double a, const State& x) {
  auto yf = y.fields();
  auto xf = x.fields();
  for (int f = 0; f < 6; ++f) {
    double* yp = yf[f]->data();
    const double* xp = xf[f]->data();
    const long n = static_cast<long>(yf[f]->size());
    parallel_for(0, n, [&](long i0, long i1) {
      for (long i = i0; i < i1; ++i) yp[i] += a * xp[i];
    });
  }
}

template <typename State>
void assign_scaled_sum(State& y, const State& base, double a, const State& x) {
  auto yf = y.fields();
  auto bf = base.fields();
  auto xf = x.fields();
  for (int f = 0; f < 6; ++f) {
    double* yp = yf[f]->data();
    const double* bp = bf[f]->data();
    const double* xp = xf[f]->data();
    const long n = static_cast<long>(yf[f]->size());
    parallel_for(0, n, [&](long i0, long i1) {
      for (long i = i0; i < i1; ++i) yp[i] = bp[i] + a * xp[i];
    });
  }
}

template <typename State, typename Rhs>
void rk4_step(State& s, const ModelParams& p, double dt, Rhs rhs) {
  if (!(dt > 0.0)) throw ConfigError("step: dt must be positive");
  static thread_local State k1, k2, k3, k4, tmp;
  if (!(k1.grid == s.grid)) {
    k1 = State(s.grid);
    k2 = State(s.grid);
    k3 = State(s.grid);
    k4 = State(s.grid);
    tmp = State(s.grid);
  }
  const double t0 = s.t;
  rhs(s, p, k1);
  assign_scaled_sum(tmp, s, 0.5 * dt, k1);
  rhs(tmp, p, k2);
  assign_scaled_sum(tmp, s, 0.5 * dt, k2);
  rhs(tmp, p, k3);
  assign_scaled_sum(tmp, s, dt, k3);
  rhs(tmp, p, k4);
  axpy(s, dt / 6.0, k1);
  axpy(s, dt / 3.0, k2);
  axpy(s, dt / 3.0, k3);
  axpy(s, dt / 6.0, k4);
  s.t = t0 + dt;
  if (!finite(s))
    throw BlowUpError("lattice step produced non-finite values (last finite state at t = " +
                          std::to_string(t0) + ")",
                      t0);
}

}  // namespace

void step(StateH& s, const ModelParams& p, double dt) {
  rk4_step(s, p, dt, [](const StateH& x, const ModelParams& pp, StateH& d) {
    rhs_horizontal(x, pp, d);
  });
}

void step(StateD& s, const ModelParams& p, double dt) {
  rk4_step(s, p, dt, [](const StateD& x, const ModelParams& pp, StateD& d) {
    rhs_diagonal(x, pp, d);
  });
}

double default_dt(const ModelParams& p) {
  return std::min(0.05, 0.25 / std::max(p.c1, p.c2));
}

double l2_norm(const Field& f) {
  double acc = 0.0;
  for (double v : f) acc += v * v;
  return std::sqrt(acc);
}

double sup_norm(const Field& f) {
  double mx = 0.0;
  for (double v : f) mx = std::max(mx, std::abs(v));
  return mx;
}

Field rolled(const Field& f, const LatticeGrid& g, int dj, int dk) {
  Field out(f.size());
  const int nj = g.nj, nk = g.nk;
  const int sj = ((dj % nj) + nj) % nj;
  const int sk = ((dk % nk) + nk) % nk;
  for (int k = 0; k < nk; ++k) {
    const int ks = (k + sk) % nk;
    for (int j = 0; j < nj; ++j) {
      const int js = (j + sj) % nj;
      out[g.idx(j, k)] = f[g.idx(js, ks)];
    }
  }
  return out;
}

}  // namespace lattice
}  // namespace kp2fpu
