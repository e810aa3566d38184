#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kp2fpu/spectral_field.hpp"

using namespace kp2fpu;

namespace {
constexpr double pi = std::numbers::pi;

SpectralField2D smooth_random(const Grid2D& g, std::uint64_t seed) {
  return SpectralField2D::random_band_limited(g, 6, 4, seed);
}
}  // namespace

TEST_CASE("derivative of a single mode is analytic") {
  Grid2D g(64, 32, 4.0 * pi, 2.0 * pi);
  auto f = SpectralField2D::from_function(g, [&](double x, double) {
    return std::sin(2.0 * pi * x / g.Lx);
  });
  auto fx = f.derivative(1, 0);
  const auto& v = fx.values();
  double err = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double expect = (2.0 * pi / g.Lx) * std::cos(2.0 * pi * g.x(i) / g.Lx);
      err = std::max(err, std::abs(v[static_cast<long>(j) * g.nx + i] - expect));
    }
  CHECK(err < 1e-12);
}

TEST_CASE("derivative of a constant vanishes") {
  Grid2D g(16, 16, 2.0 * pi, 2.0 * pi);
  auto f = SpectralField2D::from_function(g, [](double, double) { return 3.25; });
  CHECK(f.derivative(1, 0).sup_norm() < 1e-14);
  CHECK(f.derivative(2, 1).sup_norm() < 1e-14);
}

TEST_CASE("spectral second derivative matches centered differences as h -> 0") {
  // second-order finite differences converge at O(h^2) to the spectral value
  double prev_err = 0.0;
  for (int pass = 0; pass < 2; ++pass) {
    const int nx = pass == 0 ? 64 : 128;
    Grid2D g(nx, 32, 2.0 * pi, 2.0 * pi);
    auto f = SpectralField2D::random_band_limited(g, 5, 3, 99);
    auto fxx = f.derivative(2, 0);
    const auto& v = f.values();
    const auto& d = fxx.values();
    const double h = g.dx();
    double err = 0.0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const int ip = (i + 1) % g.nx, im = (i + g.nx - 1) % g.nx;
        const long r = static_cast<long>(j) * g.nx;
        const double fd = (v[r + ip] - 2.0 * v[r + i] + v[r + im]) / (h * h);
        err = std::max(err, std::abs(fd - d[r + i]));
      }
    if (pass == 0)
      prev_err = err;
    else
      CHECK(err < prev_err / 3.0);  // ~4x for O(h^2)
  }
}

TEST_CASE("antiderivative of cos is (L/2pi) sin") {
  Grid2D g(64, 16, 6.0, 3.0);
  auto f = SpectralField2D::from_function(g, [&](double x, double) {
    return std::cos(2.0 * pi * x / g.Lx);
  });
  auto F = f.antiderivative_xi(1);
  const auto& v = F.values();
  double err = 0.0;
  for (int i = 0; i < g.nx; ++i)
    err = std::max(err, std::abs(v[i] - (g.Lx / (2.0 * pi)) * std::sin(2.0 * pi * g.x(i) / g.Lx)));
  CHECK(err < 1e-12);
}

TEST_CASE("antiderivative round trip: d_xi(d_xi^-1 f) = f") {
  Grid2D g(96, 48, 7.0, 5.0);
  auto f = smooth_random(g, 7).zero_mean_projected();
  auto back = f.antiderivative_xi(1).derivative(1, 0);
  auto diff = back - f;
  CHECK(diff.sup_norm() < 1e-10 * f.sup_norm());
}

TEST_CASE("antiderivative rejects nonzero xi-mean input") {
  Grid2D g(32, 16, 2.0 * pi, 2.0 * pi);
  auto f = SpectralField2D::from_function(g, [](double, double y) { return 1.0 + 0.1 * y; });
  CHECK_THROWS_AS(f.antiderivative_xi(1), ConstraintError);
}

TEST_CASE("zero mean projection: constant -> 0, idempotent, per-eta average") {
  Grid2D g(48, 24, 5.0, 4.0);
  auto c = SpectralField2D::from_function(g, [](double, double) { return 1.0; });
  CHECK(c.zero_mean_projected().sup_norm() < 1e-13);

  // periodicized sech^2 profile: projection subtracts the per-eta xi-average
  auto f = SpectralField2D::from_function(g, [&](double x, double y) {
    const double u = std::cosh(1.5 * (x - 0.5 * g.Lx));
    return (1.0 + 0.3 * std::sin(2.0 * pi * y / g.Ly)) / (u * u);
  });
  auto p = f.zero_mean_projected();
  const auto& fv = f.values();
  const auto& pv = p.values();
  double err = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    double mean = 0.0;
    for (int i = 0; i < g.nx; ++i) mean += fv[static_cast<long>(j) * g.nx + i];
    mean /= g.nx;
    for (int i = 0; i < g.nx; ++i)
      err = std::max(err, std::abs(pv[static_cast<long>(j) * g.nx + i] -
                                   (fv[static_cast<long>(j) * g.nx + i] - mean)));
  }
  CHECK(err < 1e-12);
  auto pp = p.zero_mean_projected();
  CHECK((pp - p).sup_norm() < 1e-14);
}

TEST_CASE("hs norm: zero field, single mode, Parseval at s = 0") {
  Grid2D g(64, 32, 3.0, 2.0);
  CHECK(SpectralField2D(g).hs_norm(2.0) == 0.0);

  const double kx = 2.0 * pi * 3 / g.Lx, ky = 2.0 * pi * 2 / g.Ly;
  auto mode = SpectralField2D::from_function(
      g, [&](double x, double y) { return std::cos(kx * x + ky * y); });
  // |c| = 1/2 at +-k; weight <k>^s; box measure Lx Ly; hermitian doubling
  const double expect = std::pow(1.0 + kx * kx + ky * ky, 1.0) * std::sqrt(0.5 * g.Lx * g.Ly);
  CHECK(mode.hs_norm(2.0) == doctest::Approx(expect).epsilon(1e-12));

  auto f = smooth_random(g, 3);
  CHECK(f.hs_norm(0.0) == doctest::Approx(f.l2_grid_norm()).epsilon(1e-10));
}

TEST_CASE("hs norm with antiderivative prefactor requires zero xi-mean") {
  Grid2D g(32, 16, 2.0, 2.0);
  auto f = SpectralField2D::from_function(g, [](double, double) { return 2.0; });
  CHECK_THROWS_AS(f.hs_norm(1.0, -1, 1), ConstraintError);
  auto ok = smooth_random(g, 4).zero_mean_projected();
  CHECK(ok.hs_norm(1.0, -1, 1) > 0.0);
}

TEST_CASE("shift by one grid cell equals circular roll") {
  Grid2D g(48, 36, 5.5, 3.5);
  auto f = smooth_random(g, 11);
  auto s = f.shifted(g.dx(), 0.0);
  const auto& fv = f.values();
  const auto& sv = s.values();
  double err = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      err = std::max(err, std::abs(sv[static_cast<long>(j) * g.nx + i] -
                                   fv[static_cast<long>(j) * g.nx + (i + 1) % g.nx]));
  CHECK(err < 1e-11);
}

TEST_CASE("fractional shift matches analytic translation of a band-limited field") {
  Grid2D g(64, 32, 4.0, 4.0);
  const double kx = 2.0 * pi * 2 / g.Lx, ky = 2.0 * pi * 3 / g.Ly;
  auto f = SpectralField2D::from_function(
      g, [&](double x, double y) { return std::sin(kx * x) * std::cos(ky * y); });
  const double dx = 0.1234, dy = -0.0567;
  auto s = f.shifted(dx, dy);
  const auto& sv = s.values();
  double err = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      err = std::max(err, std::abs(sv[static_cast<long>(j) * g.nx + i] -
                                   std::sin(kx * (g.x(i) + dx)) * std::cos(ky * (g.y(j) + dy))));
  CHECK(err < 1e-11);
}

TEST_CASE("resample onto a finer grid is exact for band-limited fields") {
  Grid2D g(32, 16, 3.0, 6.0);
  Grid2D fine(96, 64, 3.0, 6.0);
  const double kx = 2.0 * pi * 4 / g.Lx, ky = 2.0 * pi * 3 / g.Ly;
  auto f = SpectralField2D::from_function(
      g, [&](double x, double y) { return std::cos(kx * x + ky * y) + 0.5; });
  auto r = f.resampled(fine);
  const auto& rv = r.values();
  double err = 0.0;
  for (int j = 0; j < fine.ny; ++j)
    for (int i = 0; i < fine.nx; ++i)
      err = std::max(err, std::abs(rv[static_cast<long>(j) * fine.nx + i] -
                                   (std::cos(kx * fine.x(i) + ky * fine.y(j)) + 0.5)));
  CHECK(err < 1e-12);
}

TEST_CASE("sampled lattice l2 equals direct sampling sum") {
  Grid2D g(32, 16, 4.0, 8.0);
  auto f = smooth_random(g, 21);
  LatticeGrid lat(64, 48);
  const double direct = [&] {
    auto fine = f.resampled(Grid2D(lat.nj, lat.nk, g.Lx, g.Ly));
    const auto& v = fine.values();
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
  }();
  CHECK(f.sampled_lattice_l2(lat) == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("linear ops and products behave") {
  Grid2D g(32, 32, 2.0, 2.0);
  auto a = smooth_random(g, 1);
  auto b = smooth_random(g, 2);
  auto s = a + b;
  auto d = s - b;
  CHECK((d - a).sup_norm() < 1e-12);
  auto p = product(a, a);
  const auto& av = a.values();
  const auto& pv = p.values();
  double err = 0.0;
  for (size_t i = 0; i < av.size(); ++i) err = std::max(err, std::abs(pv[i] - av[i] * av[i]));
  CHECK(err == 0.0);
}
