#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "kp2fpu/kdv_reference.hpp"
#include "kp2fpu/kp2.hpp"

using namespace kp2fpu;
using kp2::Coefficients;

namespace {

constexpr double pi = std::numbers::pi;

// Generator of the linear flow (nonlinearity off), with the kxi = 0 plane
// projected, acting on real grid vectors.
std::vector<double> linear_generator_apply(const Grid2D& g, const Coefficients& c,
                                           const std::vector<double>& v) {
  SpectralField2D f(g);
  f.mutable_values() = v;
  SpectralField2D pf = f.zero_mean_projected();
  SpectralField2D out = pf.derivative(3, 0);
  out *= c.a_4;
  out += c.a_e * pf.derivative(0, 2).antiderivative_xi(1);
  out *= -1.0 / c.a_t;
  return out.values();
}

// Dense matrix exponential by scaling-and-squaring Taylor series.
std::vector<double> expm_apply(const std::vector<std::vector<double>>& M, double t,
                               const std::vector<double>& v0) {
  const size_t n = v0.size();
  int s = 0;
  double norm = 0.0;
  for (const auto& row : M) {
    double r = 0.0;
    for (double x : row) r += std::abs(x);
    norm = std::max(norm, r);
  }
  while (norm * t / std::pow(2.0, s) > 0.25) ++s;
  const double h = t / std::pow(2.0, s);

  auto matvec = [&](const std::vector<double>& x) {
    std::vector<double> y(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (size_t j = 0; j < n; ++j) acc += M[i][j] * x[j];
      y[i] = acc;
    }
    return y;
  };
  // E = exp(hM) as an explicit matrix via Taylor columns
  std::vector<std::vector<double>> E(n, std::vector<double>(n, 0.0));
  for (size_t col = 0; col < n; ++col) {
    std::vector<double> term(n, 0.0), acc(n, 0.0);
    term[col] = 1.0;
    acc[col] = 1.0;
    for (int k = 1; k <= 24; ++k) {
      term = matvec(term);
      for (size_t i = 0; i < n; ++i) {
        term[i] *= h / k;
        acc[i] += term[i];
      }
    }
    for (size_t i = 0; i < n; ++i) E[i][col] = acc[i];
  }
  for (int q = 0; q < s; ++q) {
    std::vector<std::vector<double>> E2(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i)
      for (size_t k = 0; k < n; ++k) {
        const double e = E[i][k];
        if (e == 0.0) continue;
        for (size_t j = 0; j < n; ++j) E2[i][j] += e * E[k][j];
      }
    E = std::move(E2);
  }
  std::vector<double> y(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (size_t j = 0; j < n; ++j) acc += E[i][j] * v0[j];
    y[i] = acc;
  }
  return y;
}

}  // namespace

TEST_CASE("coefficient maps carry the equation constants") {
  ModelParams p{1.0, 1.0, 1.0, 2.0};
  Coefficients h = Coefficients::horizontal(p);
  CHECK(h.a_t == doctest::Approx(2.0));
  CHECK(h.a_4 == doctest::Approx(1.0 / 12.0));
  CHECK(h.a_n == doctest::Approx(2.0));
  CHECK(h.a_e == doctest::Approx(1.0));
  Coefficients d = Coefficients::diagonal(p);
  const double cs = 1.0 / std::sqrt(2.0);
  CHECK(d.a_t == doctest::Approx(2.0 * cs));
  CHECK(d.a_4 == doctest::Approx(cs * cs / 48.0));
  CHECK(d.a_n == doctest::Approx(1.0));
  CHECK(d.a_e == doctest::Approx(cs * cs));
  ModelParams bad{1.0, 0.9, 1.0, 2.0};
  CHECK_THROWS_AS(Coefficients::diagonal(bad), ConfigError);
}

TEST_CASE("normalize: identity on the normalized pattern, round trip, positivity") {
  kp2::VariableScaling s = kp2::normalize(Coefficients::normalized());
  CHECK(s.xi == doctest::Approx(1.0));
  CHECK(s.eta == doctest::Approx(1.0));
  CHECK(s.tau == doctest::Approx(1.0));
  CHECK(s.amplitude == doctest::Approx(1.0));

  Coefficients c = Coefficients::horizontal(ModelParams{1.3, 0.9, 0.7, 1.4});
  kp2::VariableScaling t = kp2::normalize(c);
  kp2::VariableScaling id = t.compose(t.inverse());
  CHECK(id.xi == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(id.eta == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(id.tau == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(id.amplitude == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(kp2::normalize(Coefficients{1.0, -1.0, 1.0, 1.0}), ConfigError);
}

TEST_CASE("normalize scaling maps the linear dispersion onto the normalized one") {
  for (Coefficients c : {Coefficients::horizontal(ModelParams{1.0, 1.0, 1.0, 2.0}),
                         Coefficients::diagonal(ModelParams{1.0, 1.0, 1.0, 2.0})}) {
    kp2::VariableScaling s = kp2::normalize(c);
    for (double kx : {0.25, 0.5, 1.0, 2.0})
      for (double ky : {0.0, 0.5, 1.5}) {
        const double lhs = s.tau * kp2::dispersion_omega(c, kx, ky);
        const double rhs = kp2::dispersion_omega(Coefficients::normalized(), s.xi * kx, s.eta * ky);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
      }
  }
}

TEST_CASE("tau derivative matches the analytic right-hand side on a cosine mode") {
  Grid2D g(128, 16, 8.0 * pi, 4.0 * pi);
  Coefficients c{2.0, 0.5, 1.5, 0.75};
  const double kx = 2.0 * pi * 3 / g.Lx, ky = 2.0 * pi * 2 / g.Ly;
  auto A = SpectralField2D::from_function(
      g, [&](double x, double y) { return std::cos(kx * x) * std::cos(ky * y); });
  auto Adot = kp2::tau_derivative(A, c);
  // d3x A = kx^3 sin(kx x) cos(ky y); A Ax = -(kx/2) sin(2 kx x) cos^2;
  // dxi^-1 deta2 A = (ky^2/kx) sin(kx x) cos(ky y)
  auto expect = SpectralField2D::from_function(g, [&](double x, double y) {
    const double cy = std::cos(ky * y);
    double v = c.a_4 * kx * kx * kx * std::sin(kx * x) * cy;
    v += c.a_n * (-0.5 * kx) * std::sin(2.0 * kx * x) * cy * cy;
    v -= c.a_e * (ky * ky / kx) * std::sin(kx * x) * cy;
    return -v / c.a_t;
  });
  CHECK((Adot - expect).sup_norm() < 1e-11);
}

TEST_CASE("phi functions: values at 0 and series/direct agreement") {
  CHECK(kp2::phi1({0.0, 0.0}).real() == doctest::Approx(1.0));
  CHECK(kp2::phi2({0.0, 0.0}).real() == doctest::Approx(0.5));
  CHECK(kp2::phi3({0.0, 0.0}).real() == doctest::Approx(1.0 / 6.0));
  const std::complex<double> z(0.0, 0.4);  // series branch
  const auto direct1 = (std::exp(z) - 1.0) / z;
  const auto direct2 = (std::exp(z) - 1.0 - z) / (z * z);
  const auto direct3 = (std::exp(z) - 1.0 - z - 0.5 * z * z) / (z * z * z);
  CHECK(std::abs(kp2::phi1(z) - direct1) < 1e-14);
  CHECK(std::abs(kp2::phi2(z) - direct2) < 1e-14);
  CHECK(std::abs(kp2::phi3(z) - direct3) < 1e-14);
}

TEST_CASE("zero field steps to zero") {
  Grid2D g(32, 16, 2.0 * pi, 2.0 * pi);
  kp2::Stepper st(g, Coefficients::normalized(), 0.01);
  SpectralField2D A(g);
  st.step(A, 0.0);
  CHECK(A.sup_norm() == 0.0);
}

TEST_CASE("linear-only step matches the dense exponential of the generator (8x8)") {
  Grid2D g(8, 8, 2.0 * pi, 2.0 * pi);
  Coefficients c = Coefficients::normalized();
  // band-limited zero-mean data away from Nyquist
  auto A0 = SpectralField2D::from_function(g, [&](double x, double y) {
    return std::sin(x) * std::cos(2.0 * y) + 0.5 * std::cos(2.0 * x + y);
  });
  const int n = g.nx * g.ny;
  std::vector<std::vector<double>> M(n, std::vector<double>(n));
  for (int col = 0; col < n; ++col) {
    std::vector<double> e(n, 0.0);
    e[col] = 1.0;
    std::vector<double> Ge = linear_generator_apply(g, c, e);
    for (int row = 0; row < n; ++row) M[row][col] = Ge[row];
  }
  const double dtau = 0.02;
  const int nsteps = 5;
  kp2::Stepper st(g, c, dtau);
  st.set_nonlinear_enabled(false);
  SpectralField2D A = A0;
  for (int i = 0; i < nsteps; ++i) st.step(A, i * dtau);
  std::vector<double> dense = expm_apply(M, nsteps * dtau, A0.values());
  const auto& got = A.values();
  double err = 0.0;
  for (int i = 0; i < n; ++i) err = std::max(err, std::abs(got[i] - dense[i]));
  CHECK(err < 1e-10);
}

TEST_CASE("eta-independent data follows a 1D KdV reference solve") {
  Grid2D g(512, 16, 32.0 * pi, 16.0 * pi);
  Coefficients c = Coefficients::normalized();
  kp2::PresetSpec spec;
  spec.name = "line-soliton";
  spec.kappa = 0.5;
  SpectralField2D A0 = kp2::make_initial_data(g, spec, c);

  const double dtau = 1e-3;
  const int nsteps = 100;
  kp2::Stepper st(g, c, dtau);
  SpectralField2D A = A0;
  for (int i = 0; i < nsteps; ++i) st.step(A, i * dtau);

  // KP-II preserves eta-independence
  CHECK(A.derivative(0, 1).sup_norm() < 1e-10 * A.sup_norm());

  const auto& v0 = A0.values();
  std::vector<double> line0(v0.begin(), v0.begin() + g.nx);
  std::vector<double> ref = kdv1d::integrate(line0, g.Lx, c, nsteps * dtau, 4000);
  const auto& vf = A.values();
  double err = 0.0;
  for (int i = 0; i < g.nx; ++i) err = std::max(err, std::abs(vf[i] - ref[i]));
  CHECK(err < 1e-8);
}

TEST_CASE("line soliton translates with preserved shape and L2 norm") {
  Grid2D g(512, 16, 32.0 * pi, 16.0 * pi);
  Coefficients c = Coefficients::normalized();
  kp2::PresetSpec spec;
  spec.name = "line-soliton";
  spec.kappa = 0.5;
  SpectralField2D A0 = kp2::make_initial_data(g, spec, c);
  const double speed = kp2::soliton_speed(g, spec, c);

  const double tau_end = 0.5;
  kp2::Trajectory traj = kp2::solve(A0, c, tau_end, 1e-3, {tau_end});
  CHECK(traj.diagnostics.l2_max_rel_drift <= 1e-5 * tau_end / 1.0 + 1e-12);

  const SpectralField2D& A = traj.snapshots.back().A;
  SpectralField2D expected = A0.shifted(-speed * tau_end, 0.0);
  CHECK((A - expected).sup_norm() < 1e-6 * A0.sup_norm());
}

TEST_CASE("perturbed line soliton: L2 conservation and exact zero-mean preservation") {
  Grid2D g(256, 32, 32.0 * pi, 16.0 * pi);
  Coefficients c = Coefficients::horizontal(ModelParams{1.0, 1.0, 1.0, 2.0});
  kp2::PresetSpec spec;
  spec.name = "perturbed-line-soliton";
  spec.kappa = 0.4;
  spec.delta = 0.2;
  SpectralField2D A0 = kp2::make_initial_data(g, spec, c);
  kp2::Trajectory traj = kp2::solve(A0, c, 0.25, 2e-3, {0.1, 0.25});
  CHECK(traj.diagnostics.l2_max_rel_drift <= 1e-5);
  CHECK(traj.diagnostics.max_zero_mode_rel <= 1e-12);
  CHECK(traj.snapshots.size() == 3);  // 0, 0.1, 0.25
}

TEST_CASE("solve rejects data violating the zero-mass constraint") {
  Grid2D g(64, 16, 2.0 * pi, 2.0 * pi);
  auto bad = SpectralField2D::from_function(
      g, [](double, double y) { return 1.0 + 0.1 * std::sin(y); });
  CHECK_THROWS_WITH_AS(kp2::solve(bad, Coefficients::normalized(), 0.1, 1e-3, {}),
                       doctest::Contains("zero-mass"), ConstraintError);
}

TEST_CASE("hypothesis report accepts smooth presets and lists norms") {
  Grid2D g(256, 32, 32.0 * pi, 16.0 * pi);
  Coefficients c = Coefficients::normalized();
  kp2::PresetSpec spec;
  spec.name = "gaussian-zero-mean";
  SpectralField2D A0 = kp2::make_initial_data(g, spec, c);
  kp2::HypothesisReport r = kp2::check_data_hypotheses(A0);
  CHECK(r.admissible);
  CHECK(r.norm_a0_h9 > 0.0);
  CHECK(r.norm_dxim2_deta2_h9 > 0.0);
  CHECK(r.norm_bracket_h3 > 0.0);
  CHECK(r.norm_a0_h9 < 1e8);
}

TEST_CASE("solve of zero data is identically zero") {
  Grid2D g(64, 16, 4.0 * pi, 4.0 * pi);
  kp2::Trajectory traj =
      kp2::solve(SpectralField2D(g), Coefficients::normalized(), 0.2, 1e-2, {0.1});
  for (const auto& s : traj.snapshots) CHECK(s.A.sup_norm() == 0.0);
}

TEST_CASE("fourth-order convergence in dtau") {
  Grid2D g(128, 16, 16.0 * pi, 8.0 * pi);
  Coefficients c = Coefficients::normalized();
  kp2::PresetSpec spec;
  spec.name = "perturbed-line-soliton";
  spec.kappa = 0.4;
  spec.delta = 0.3;
  spec.amplitude = 2.0;  // stronger nonlinearity so time error dominates
  SpectralField2D A0 = kp2::make_initial_data(g, spec, c);
  const double tau_end = 0.08;
  auto run = [&](double dtau) {
    SpectralField2D A = A0;
    kp2::Stepper st(g, c, dtau);
    const int n = static_cast<int>(std::lround(tau_end / dtau));
    for (int i = 0; i < n; ++i) st.step(A, i * dtau);
    return A;
  };
  SpectralField2D ref = run(tau_end / 512);
  const double e1 = (run(tau_end / 32) - ref).sup_norm();
  const double e2 = (run(tau_end / 64) - ref).sup_norm();
  REQUIRE(e1 > 1e-13);
  const double ratio = e1 / e2;
  CHECK(ratio > 10.0);
  CHECK(ratio < 40.0);
}

TEST_CASE("doubling the grid changes the band-limited solution negligibly") {
  Coefficients c = Coefficients::normalized();
  kp2::PresetSpec spec;
  spec.name = "perturbed-line-soliton";
  spec.kappa = 0.4;
  spec.delta = 0.2;
  Grid2D g1(256, 16, 32.0 * pi, 16.0 * pi);
  Grid2D g2(512, 32, 32.0 * pi, 16.0 * pi);
  const double tau_end = 0.1, dtau = 1e-3;
  SpectralField2D A1 = kp2::solve(kp2::make_initial_data(g1, spec, c), c, tau_end, dtau, {})
                           .snapshots.back()
                           .A;
  SpectralField2D A2 = kp2::solve(kp2::make_initial_data(g2, spec, c), c, tau_end, dtau, {})
                           .snapshots.back()
                           .A;
  const double diff = (A1.resampled(g2) - A2).sup_norm();
  CHECK(diff < 1e-7 * A2.sup_norm());
}

TEST_CASE("evolver reproduces solve snapshots") {
  Grid2D g(128, 16, 16.0 * pi, 8.0 * pi);
  Coefficients c = Coefficients::normalized();
  kp2::PresetSpec spec;
  spec.name = "gaussian-zero-mean";
  spec.sigma_xi = 2.0;
  spec.sigma_eta = 3.0;
  SpectralField2D A0 = kp2::make_initial_data(g, spec, c);
  kp2::Trajectory traj = kp2::solve(A0, c, 0.1, 1e-3, {0.05, 0.1});
  kp2::Evolver ev(A0, c, 1e-3);
  ev.advance_to(0.05);
  CHECK((ev.current() - traj.snapshots[1].A).sup_norm() < 1e-13);
  ev.advance_to(0.1);
  CHECK((ev.current() - traj.snapshots[2].A).sup_norm() < 1e-13);
}
