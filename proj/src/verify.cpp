#include "kp2fpu/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "kp2fpu/errors.hpp"

namespace kp2fpu {
namespace verify {

namespace {

double l2(const lattice::Field& f) { return lattice::l2_norm(f); }

lattice::Field diff_scaled(const lattice::Field& state_field, double scale,
                           const lattice::Field& ansatz_field) {
  lattice::Field out(state_field.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = state_field[i] - scale * ansatz_field[i];
  return out;
}

}  // namespace

ResidualFieldsH residual_fields_horizontal(const ansatz::HorizontalBundle& b,
                                           const ModelParams& p) {
  const double eps = b.eps;
  const double e2 = eps * eps, e3 = eps * eps * eps;
  const double c1s = p.c1 * p.c1, c2s = p.c2 * p.c2;
  ResidualFieldsH r;
  r.u1 = (eps * p.c1) * b.tau.A.derivative(1, 0) - e3 * b.tau.Adot + b.W.shifted(eps, 0.0) - b.W;
  r.u2 = (eps * p.c1) * b.U.derivative(1, 0) - e3 * b.Udot + b.W.shifted(0.0, e2) - b.W;
  SpectralField2D A_m = b.tau.A.shifted(-eps, 0.0);
  SpectralField2D U_m = b.U.shifted(0.0, -e2);
  r.w = (eps * p.c1) * b.W.derivative(1, 0) - e3 * b.Wdot + c1s * (b.tau.A - A_m) +
        c2s * (b.U - U_m) +
        (p.alpha1 * e2) * (product(b.tau.A, b.tau.A) - product(A_m, A_m));
  r.z = (0.5 * p.alpha2 * e2) * (product(b.U, b.U) - product(U_m, U_m));
  return r;
}

ResidualFieldsD residual_fields_diagonal(const ansatz::DiagonalBundle& b, const ModelParams& p) {
  const double eps = b.eps;
  const double e2 = eps * eps, e3 = eps * eps * eps;
  const double cs = p.c1 / std::sqrt(2.0);
  const double c1s = p.c1 * p.c1;
  const double a1 = 2.0 * p.alpha1;
  ResidualFieldsD r;
  r.d = b.U.shifted(eps, e2) - b.V + (eps * cs) * b.D.derivative(1, 0) - e3 * b.Ddot;
  r.x = b.U.shifted(eps, 0.0) - b.V + (eps * cs) * b.X.derivative(1, 0) - e3 * b.Xdot;
  r.y = b.U.shifted(0.0, e2) - b.V + (eps * cs) * b.Y.derivative(1, 0) - e3 * b.Ydot;
  SpectralField2D D_m = b.D.shifted(-eps, -e2);
  SpectralField2D X_m = b.X.shifted(-eps, 0.0);
  SpectralField2D Y_m = b.Y.shifted(0.0, -e2);
  r.u = c1s * (b.L - D_m - X_m - Y_m) +
        (a1 * e2) * (product(b.L, b.L) - product(D_m, D_m) - product(X_m, X_m) +
                     product(Y_m, Y_m)) +
        (eps * cs) * b.U.derivative(1, 0) - e3 * b.Udot;
  r.v = c1s * (b.D - b.L + b.X + b.Y) +
        (a1 * e2) * (product(b.D, b.D) - product(b.L, b.L) + product(b.X, b.X) -
                     product(b.Y, b.Y)) +
        (eps * cs) * b.V.derivative(1, 0) - e3 * b.Vdot;
  return r;
}

std::vector<std::pair<std::string, double>> residual_norms_horizontal(
    const ansatz::HorizontalBundle& b, const ModelParams& p, const LatticeGrid& lat) {
  ResidualFieldsH r = residual_fields_horizontal(b, p);
  return {{"res_u1", r.u1.sampled_lattice_l2(lat)},
          {"res_u2", r.u2.sampled_lattice_l2(lat)},
          {"res_w", r.w.sampled_lattice_l2(lat)},
          {"res_z", r.z.sampled_lattice_l2(lat)}};
}

std::vector<std::pair<std::string, double>> residual_norms_diagonal(
    const ansatz::DiagonalBundle& b, const ModelParams& p, const LatticeGrid& lat) {
  ResidualFieldsD r = residual_fields_diagonal(b, p);
  return {{"res_d", r.d.sampled_lattice_l2(lat)},
          {"res_x", r.x.sampled_lattice_l2(lat)},
          {"res_y", r.y.sampled_lattice_l2(lat)},
          {"res_u", r.u.sampled_lattice_l2(lat)},
          {"res_v", r.v.sampled_lattice_l2(lat)}};
}

DefiningResidualSup defining_relation_sup(const SpectralField2D& A, const ModelParams& p,
                                          double eps) {
  DefiningResidualSup out{};
  {
    ansatz::HorizontalBundle hb = ansatz::build_horizontal(A, p, eps);
    ResidualFieldsH rh = residual_fields_horizontal(hb, p);
    out.wxr = rh.u1.sup_norm();
    out.ut = rh.u2.sup_norm();
  }
  {
    ansatz::DiagonalBundle db = ansatz::build_diagonal(A, p, eps);
    const double cs = p.c1 / std::sqrt(2.0);
    const double e2 = eps * eps, e3 = eps * eps * eps;
    SpectralField2D LD = db.L + db.D;
    SpectralField2D LDdot = db.Ldot + db.Ddot;
    SpectralField2D beq = db.U.shifted(eps, e2) - db.U + (eps * cs) * LD.derivative(1, 0) -
                          e3 * LDdot;
    out.beq = beq.sup_norm();
    ResidualFieldsD rd = residual_fields_diagonal(db, p);
    out.eeq = rd.u.sup_norm();
    out.feq = rd.v.sup_norm();
  }
  return out;
}

PerturbationsH extract_perturbations(const lattice::StateH& s, const SampledAnsatzH& sa,
                                     double eps) {
  const double inv = 1.0 / (eps * eps);
  PerturbationsH p;
  const size_t n = s.u1.size();
  p.U1.resize(n);
  p.U2.resize(n);
  p.V1.resize(n);
  p.V2.resize(n);
  p.W.resize(n);
  p.Z.resize(n);
  for (size_t i = 0; i < n; ++i) {
    p.U1[i] = s.u1[i] * inv - sa.A[i];
    p.U2[i] = s.u2[i] * inv - sa.U[i];
    p.V1[i] = s.v1[i] * inv;
    p.V2[i] = s.v2[i] * inv;
    p.W[i] = s.w[i] * inv - sa.W[i];
    p.Z[i] = s.z[i] * inv;
  }
  return p;
}

PerturbationsD extract_perturbations(const lattice::StateD& s, const SampledAnsatzD& sa,
                                     double eps) {
  const double inv = 1.0 / (eps * eps);
  PerturbationsD p;
  const size_t n = s.al.size();
  p.L.resize(n);
  p.D.resize(n);
  p.X.resize(n);
  p.Y.resize(n);
  p.U.resize(n);
  p.V.resize(n);
  for (size_t i = 0; i < n; ++i) {
    p.L[i] = s.al[i] * inv - sa.L[i];
    p.D[i] = s.ad[i] * inv - sa.D[i];
    p.X[i] = s.ax[i] * inv - sa.X[i];
    p.Y[i] = s.ay[i] * inv - sa.Y[i];
    p.U[i] = s.u[i] * inv - sa.U[i];
    p.V[i] = s.v[i] * inv - sa.V[i];
  }
  return p;
}

double energy_horizontal(const PerturbationsH& pert, const SampledAnsatzH& sa,
                         const ModelParams& p, double eps) {
  const double c1s = p.c1 * p.c1, c2s = p.c2 * p.c2;
  const double a1e = p.alpha1 * eps * eps, a2e = p.alpha2 * eps * eps;
  double acc = 0.0;
  const size_t n = pert.U1.size();
  for (size_t i = 0; i < n; ++i) {
    const double U1 = pert.U1[i], U2 = pert.U2[i], V1 = pert.V1[i], V2 = pert.V2[i];
    const double W = pert.W[i], Z = pert.Z[i];
    double term = W * W + Z * Z + c1s * U1 * U1 + c2s * U2 * U2 + c1s * V1 * V1 + c2s * V2 * V2;
    term += a1e * (2.0 * sa.A[i] * U1 * U1 + (2.0 / 3.0) * (U1 * U1 * U1 + V2 * V2 * V2));
    term += a2e * (sa.A[i] * V1 * V1 + U1 * V1 * V1 + U2 * U2 * V2 + 2.0 * sa.U[i] * U2 * V2);
    acc += term;
  }
  return 0.5 * acc;
}

double energy_diagonal(const PerturbationsD& pert, const SampledAnsatzD& sa,
                       const ModelParams& p, double eps) {
  const double c1s = p.c1 * p.c1;
  const double a2e = 2.0 * p.alpha1 * eps * eps;
  const double a23 = (2.0 / 3.0) * p.alpha1 * eps * eps;
  double acc = 0.0;
  const size_t n = pert.L.size();
  for (size_t i = 0; i < n; ++i) {
    const double L = pert.L[i], D = pert.D[i], X = pert.X[i], Y = pert.Y[i];
    const double U = pert.U[i], V = pert.V[i];
    acc += 0.5 * (U * U + V * V) + 0.5 * c1s * (L * L + D * D + X * X + Y * Y);
    acc += a2e * (L * L * sa.L[i] + D * D * sa.D[i] + X * X * sa.X[i] - Y * Y * sa.Y[i]);
    acc += a23 * (L * L * L + D * D * D + X * X * X - Y * Y * Y);
  }
  return acc;
}

CoercivityCheck coercivity_check(const std::vector<const lattice::Field*>& pert_fields,
                                 double energy, double k0) {
  double sum_sq = 0.0;
  for (const lattice::Field* f : pert_fields) {
    const double nn = l2(*f);
    sum_sq += nn * nn;
  }
  CoercivityCheck out;
  if (sum_sq == 0.0) return out;  // ratio defined as 0 for zero perturbations
  if (!(energy > 0.0)) {
    out.ratio = std::numeric_limits<double>::infinity();
    out.flagged = true;
    return out;
  }
  out.ratio = sum_sq / (2.0 * energy);
  out.flagged = out.ratio > k0;
  return out;
}

SlopeFit fit_slope(const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() < 3) throw ConfigError("fit_slope: need at least 3 points");
  std::vector<double> x, y;
  for (auto& [e, v] : pts) {
    if (!(e > 0.0) || !(v > 0.0))
      throw ConfigError("fit_slope: all abscissae and values must be positive");
    x.push_back(std::log(e));
    y.push_back(std::log(v));
  }
  const size_t n = x.size();
  const double xm = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  double rss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double r = y[i] - ym - fit.slope * (x[i] - xm);
    rss += r * r;
  }
  if (n > 2) fit.half_width = 1.96 * std::sqrt(rss / ((n - 2) * sxx));
  return fit;
}

double sampling_ratio(const SpectralField2D& U, double s, double eps) {
  if (!(s > 1.0)) throw ConfigError("sampling_ratio: s must exceed 1");
  const Grid2D& g = U.grid();
  int nj = static_cast<int>(std::lround(g.Lx / eps));
  if (nj % 2) ++nj;
  nj = std::max(nj, g.nx);
  const double ec = g.Lx / nj;
  int nk = static_cast<int>(std::lround(g.Ly / (ec * ec)));
  if (nk % 2) ++nk;
  nk = std::max(nk, g.ny);
  const double num = U.sampled_lattice_l2(LatticeGrid(nj, nk)) * std::pow(ec, 1.5);
  if (num == 0.0) return 0.0;
  return num / U.hs_norm(s);
}

SamplingBoundReport sampling_bound_check(double Lxi, double Leta, int nx, int ny, int mx_max,
                                         int ny_max, double s,
                                         const std::vector<double>& eps_list, int n_samples,
                                         std::uint64_t seed) {
  if (!(s > 1.0)) throw ConfigError("sampling_bound_check: s must exceed 1");
  SamplingBoundReport rep;
  rep.ratios.assign(n_samples, {});
  for (double eps_nom : eps_list) {
    int nj = static_cast<int>(std::lround(Lxi / eps_nom));
    if (nj % 2) ++nj;
    nj = std::max(nj, nx);
    const double eps = Lxi / nj;
    int nk = static_cast<int>(std::lround(Leta / (eps * eps)));
    if (nk % 2) ++nk;
    nk = std::max(nk, ny);
    const double Leta_c = nk * eps * eps;
    const Grid2D g(nx, ny, Lxi, Leta_c);
    const LatticeGrid lat(nj, nk);
    rep.eps.push_back(eps);
    for (int q = 0; q < n_samples; ++q) {
      SpectralField2D U = SpectralField2D::random_band_limited(g, mx_max, ny_max, seed + q);
      const double num = U.sampled_lattice_l2(lat) * std::pow(eps, 1.5);
      const double den = U.hs_norm(s);
      const double ratio = num / den;
      rep.ratios[q].push_back(ratio);
      rep.max_ratio = std::max(rep.max_ratio, ratio);
    }
  }
  for (int q = 0; q < n_samples; ++q) {
    for (size_t i = 0; i + 1 < rep.eps.size(); ++i) {
      // eps ascending: ratio at the smaller eps should not exceed the larger
      ++rep.trend_pairs;
      if (rep.ratios[q][i] > rep.ratios[q][i + 1] * 1.05) ++rep.trend_violations;
    }
  }
  return rep;
}

ResolvedGrids resolve_grids(double eps_nominal, double Lxi, double Leta_nominal,
                            int solver_neta) {
  if (!(eps_nominal > 0.0) || !(Lxi > 0.0) || !(Leta_nominal > 0.0))
    throw ConfigError("resolve_grids: eps and box lengths must be positive");
  ResolvedGrids rg;
  const int nj = nice_even_size(Lxi / eps_nominal);
  rg.eps = Lxi / nj;
  const int nk = nice_even_size(Leta_nominal / (rg.eps * rg.eps));
  rg.Leta = nk * rg.eps * rg.eps;
  rg.lattice = LatticeGrid(nj, nk);
  const int sny = std::min(solver_neta, nk);
  if (sny < 4 || sny % 2) throw ConfigError("resolve_grids: solver_neta must be even and >= 4");
  rg.solver = Grid2D(nj, sny, Lxi, rg.Leta);
  return rg;
}

namespace {

struct FrameOps {
  // per-frame helpers used by run_comparison
  ansatz::Frame frame;
  ModelParams params;
  double eps;
  double speed;
};

Observation observe_horizontal(const lattice::StateH& st, const ansatz::HorizontalBundle& b,
                               const FrameOps& fo, const LatticeGrid& lat, double k0,
                               double tau) {
  const double e2 = fo.eps * fo.eps;
  SampledAnsatzH sa;
  sa.A = ansatz::sample_to_lattice(b.tau.A, fo.eps, st.t, fo.speed, lat);
  sa.U = ansatz::sample_to_lattice(b.U, fo.eps, st.t, fo.speed, lat);
  sa.W = ansatz::sample_to_lattice(b.W, fo.eps, st.t, fo.speed, lat);
  PerturbationsH pert = extract_perturbations(st, sa, fo.eps);

  Observation o;
  o.t = st.t;
  o.tau = tau;
  o.a_u1 = e2 * l2(pert.U1);
  o.a_u2 = e2 * l2(pert.U2);
  o.a_v1 = e2 * l2(pert.V1);
  o.a_v2 = e2 * l2(pert.V2);
  o.a_w = e2 * l2(pert.W);
  o.a_z = e2 * l2(pert.Z);
  o.e_u1 = o.a_u1;  // the u1 ansatz is exactly eps^2 A
  o.e_u2 = l2(st.u2);
  o.e_v1 = o.a_v1;
  o.e_v2 = o.a_v2;
  o.e_z = o.a_z;
  {
    lattice::Field w_lead(st.w.size());
    for (size_t i = 0; i < w_lead.size(); ++i) w_lead[i] = st.w[i] + e2 * fo.params.c1 * sa.A[i];
    o.e_w = l2(w_lead);
  }
  o.total_theorem = o.e_u1 + o.e_u2 + o.e_w + o.e_v1 + o.e_v2 + o.e_z;
  o.total_ansatz = o.a_u1 + o.a_u2 + o.a_w + o.a_v1 + o.a_v2 + o.a_z;
  o.E = energy_horizontal(pert, sa, fo.params, fo.eps);
  o.Q = std::sqrt(2.0 * std::max(0.0, o.E));
  o.H = lattice::hamiltonian(st, fo.params);
  o.coercivity =
      coercivity_check({&pert.W, &pert.Z, &pert.U1, &pert.U2, &pert.V1, &pert.V2}, o.E, k0)
          .ratio;
  return o;
}

Observation observe_diagonal(const lattice::StateD& st, const ansatz::DiagonalBundle& b,
                             const FrameOps& fo, const LatticeGrid& lat, double k0, double tau) {
  const double e2 = fo.eps * fo.eps;
  SampledAnsatzD sa;
  sa.A = ansatz::sample_to_lattice(b.tau.A, fo.eps, st.t, fo.speed, lat);
  sa.L = ansatz::sample_to_lattice(b.L, fo.eps, st.t, fo.speed, lat);
  sa.D = ansatz::sample_to_lattice(b.D, fo.eps, st.t, fo.speed, lat);
  sa.X = ansatz::sample_to_lattice(b.X, fo.eps, st.t, fo.speed, lat);
  sa.Y = ansatz::sample_to_lattice(b.Y, fo.eps, st.t, fo.speed, lat);
  sa.U = ansatz::sample_to_lattice(b.U, fo.eps, st.t, fo.speed, lat);
  sa.V = ansatz::sample_to_lattice(b.V, fo.eps, st.t, fo.speed, lat);
  PerturbationsD pert = extract_perturbations(st, sa, fo.eps);

  Observation o;
  o.t = st.t;
  o.tau = tau;
  o.a_u1 = e2 * l2(pert.L);
  o.a_u2 = e2 * l2(pert.D);
  o.a_v1 = e2 * l2(pert.X);
  o.a_v2 = e2 * l2(pert.Y);
  o.a_w = e2 * l2(pert.U);
  o.a_z = e2 * l2(pert.V);
  o.total_ansatz = o.a_u1 + o.a_u2 + o.a_w + o.a_v1 + o.a_v2 + o.a_z;

  const size_t n = st.al.size();
  lattice::Field tmp(n);
  // u^(1) = ax + al vs eps^2 A
  for (size_t i = 0; i < n; ++i) tmp[i] = st.ax[i] + st.al[i] - e2 * sa.A[i];
  o.e_u1 = l2(tmp);
  // u^(2) = ay + al vs 0
  for (size_t i = 0; i < n; ++i) tmp[i] = st.ay[i] + st.al[i];
  o.e_u2 = l2(tmp);
  // dx/dt vs -eps^2 c1* A
  for (size_t i = 0; i < n; ++i) tmp[i] = st.u[i] + e2 * fo.speed * sa.A[i];
  o.e_w = l2(tmp);
  // v^(1) = ad_{m,n} - ay_{m+1,n} vs eps^2 A
  lattice::Field ay_shift = lattice::rolled(st.ay, st.grid, 1, 0);
  for (size_t i = 0; i < n; ++i) tmp[i] = st.ad[i] - ay_shift[i] - e2 * sa.A[i];
  o.e_v1 = l2(tmp);
  // v^(2) = al_{m,n+1} + ay_{m,n} vs 0
  lattice::Field al_shift = lattice::rolled(st.al, st.grid, 0, 1);
  for (size_t i = 0; i < n; ++i) tmp[i] = al_shift[i] + st.ay[i];
  o.e_v2 = l2(tmp);
  // dchi/dt vs -eps^2 c1* A
  for (size_t i = 0; i < n; ++i) tmp[i] = st.v[i] + e2 * fo.speed * sa.A[i];
  o.e_z = l2(tmp);
  o.total_theorem = o.e_u1 + o.e_u2 + o.e_w + o.e_v1 + o.e_v2 + o.e_z;

  o.E = energy_diagonal(pert, sa, fo.params, fo.eps);
  o.Q = std::sqrt(2.0 * std::max(0.0, o.E));
  o.H = lattice::hamiltonian(st, fo.params);
  o.coercivity =
      coercivity_check({&pert.U, &pert.V, &pert.L, &pert.D, &pert.X, &pert.Y}, o.E, k0).ratio;
  return o;
}

void finalize_report(RunReport& rep, double eps) {
  for (const Observation& o : rep.obs) {
    rep.max_Q = std::max(rep.max_Q, o.Q);
    rep.max_total_theorem = std::max(rep.max_total_theorem, o.total_theorem);
    rep.max_total_ansatz = std::max(rep.max_total_ansatz, o.total_ansatz);
    if (std::isfinite(o.coercivity)) rep.coercivity_max = std::max(rep.coercivity_max, o.coercivity);
  }
  if (!rep.obs.empty()) {
    const double h0 = rep.obs.front().H;
    for (const Observation& o : rep.obs)
      if (std::abs(h0) > 0.0)
        rep.hamiltonian_rel_drift =
            std::max(rep.hamiltonian_rel_drift, std::abs(o.H - h0) / std::abs(h0));
  }
  // centered differences of E over the observation stride
  const double e35 = std::pow(eps, 3.5);
  const double e3 = eps * eps * eps;
  for (size_t i = 1; i + 1 < rep.obs.size(); ++i) {
    const double dtobs = rep.obs[i + 1].t - rep.obs[i - 1].t;
    if (dtobs <= 0.0) continue;
    const double edot = (rep.obs[i + 1].E - rep.obs[i - 1].E) / dtobs;
    const double E = rep.obs[i].E;
    const double denom = e35 * std::sqrt(std::max(E, 0.0)) + e3 * E;
    if (denom > 1e-300)
      rep.energy_ratio_max = std::max(rep.energy_ratio_max, std::abs(edot) / denom);
  }
}

}  // namespace

RunReport run_comparison(const ComparisonSpec& spec) {
  spec.params.validate();
  if (spec.frame == ansatz::Frame::diagonal) spec.params.require_diagonal_mode();
  ResolvedGrids rg = resolve_grids(spec.eps_nominal, spec.Lxi, spec.Leta_nominal,
                                   spec.solver_neta);
  const double eps = rg.eps;
  const kp2::Coefficients coeffs = (spec.frame == ansatz::Frame::horizontal)
                                       ? kp2::Coefficients::horizontal(spec.params)
                                       : kp2::Coefficients::diagonal(spec.params);
  RunReport rep;
  rep.frame = spec.frame;
  rep.eps_nominal = spec.eps_nominal;
  rep.eps = eps;
  rep.nj = rg.lattice.nj;
  rep.nk = rg.lattice.nk;
  rep.solver_ny = rg.solver.ny;
  rep.Lxi = spec.Lxi;
  rep.Leta = rg.Leta;

  SpectralField2D A0 = kp2::make_initial_data(rg.solver, spec.preset, coeffs);
  {
    kp2::HypothesisReport hyp = kp2::check_data_hypotheses(A0);
    if (!hyp.admissible) throw ConstraintError(hyp.failure);
  }

  const double T = spec.tau0 / (eps * eps * eps);
  const double dt0 = spec.dt > 0.0 ? spec.dt : lattice::default_dt(spec.params);
  const int stride = std::max(1, spec.observer_stride);
  const long nsteps =
      static_cast<long>(stride) * std::max<long>(1, std::lround(std::ceil(T / (dt0 * stride))));
  const double dt = T / static_cast<double>(nsteps);
  rep.dt = dt;
  const long nobs = nsteps / stride + 1;

  FrameOps fo{spec.frame, spec.params, eps, ansatz::frame_speed(spec.frame, spec.params)};
  kp2::Evolver evolver(A0, coeffs, spec.dtau);

  auto run_loop = [&](auto& state, auto build, auto observe) {
    for (long i = 0; i < nobs; ++i) {
      const double tau = eps * eps * eps * state.t;
      const SpectralField2D& A = evolver.advance_to(tau);
      auto bundle = build(A);
      if (i == 0) {
        rep.residual_norms_t0 = [&] {
          if constexpr (std::is_same_v<std::decay_t<decltype(state)>, lattice::StateH>)
            return residual_norms_horizontal(bundle, spec.params, rg.lattice);
          else
            return residual_norms_diagonal(bundle, spec.params, rg.lattice);
        }();
      }
      rep.obs.push_back(observe(state, bundle, tau));
      if (i + 1 < nobs) {
        for (int s = 0; s < stride; ++s) lattice::step(state, spec.params, dt);
        // keep t free of accumulated rounding
        state.t = static_cast<double>((i + 1) * stride) * dt;
      }
    }
  };

  try {
    if (spec.frame == ansatz::Frame::horizontal) {
      ansatz::HorizontalBundle b0 = ansatz::build_horizontal(A0, spec.params, eps);
      lattice::StateH st = ansatz::initial_state_horizontal(b0, spec.params, rg.lattice);
      run_loop(
          st, [&](const SpectralField2D& A) { return ansatz::build_horizontal(A, spec.params, eps); },
          [&](const lattice::StateH& s, const ansatz::HorizontalBundle& b, double tau) {
            return observe_horizontal(s, b, fo, rg.lattice, spec.coercivity_k0, tau);
          });
    } else {
      ansatz::DiagonalBundle b0 = ansatz::build_diagonal(A0, spec.params, eps);
      lattice::StateD st = ansatz::initial_state_diagonal(b0, spec.params, rg.lattice);
      run_loop(
          st, [&](const SpectralField2D& A) { return ansatz::build_diagonal(A, spec.params, eps); },
          [&](const lattice::StateD& s, const ansatz::DiagonalBundle& b, double tau) {
            return observe_diagonal(s, b, fo, rg.lattice, spec.coercivity_k0, tau);
          });
    }
  } catch (const BlowUpError& e) {
    rep.failed = true;
    rep.failure_time = e.last_valid_time;
    rep.failure_reason = e.what();
  }
  rep.kp2_diagnostics = evolver.diagnostics();
  finalize_report(rep, eps);
  for (const Observation& o : rep.obs)
    if (std::isfinite(o.coercivity) && o.coercivity > spec.coercivity_k0)
      rep.coercivity_flagged = true;
  return rep;
}

std::string report_csv(const RunReport& r) {
  std::string out =
      "t,tau,err_u1,err_u2_lead,err_w_lead,err_v1,err_v2,err_z,"
      "ans_u1,ans_u2,ans_w,ans_v1,ans_v2,ans_z,total_lead,total_ansatz,E,Q,H,coercivity\n";
  char buf[64];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.17g%c", v, sep);
    out += buf;
  };
  for (const Observation& o : r.obs) {
    put(o.t, ',');
    put(o.tau, ',');
    put(o.e_u1, ',');
    put(o.e_u2, ',');
    put(o.e_w, ',');
    put(o.e_v1, ',');
    put(o.e_v2, ',');
    put(o.e_z, ',');
    put(o.a_u1, ',');
    put(o.a_u2, ',');
    put(o.a_w, ',');
    put(o.a_v1, ',');
    put(o.a_v2, ',');
    put(o.a_z, ',');
    put(o.total_theorem, ',');
    put(o.total_ansatz, ',');
    put(o.E, ',');
    put(o.Q, ',');
    put(o.H, ',');
    put(o.coercivity, '\n');
  }
  return out;
}

}  // namespace verify
}  // namespace kp2fpu
