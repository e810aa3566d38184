#include "kp2fpu/kdv_reference.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "kp2fpu/errors.hpp"

namespace kp2fpu {
namespace kdv1d {

namespace {
using Complex = std::complex<double>;
}

std::vector<double> integrate(const std::vector<double>& u0, double L,
                              const kp2::Coefficients& c, double tau_end, int nsteps) {
  const int n = static_cast<int>(u0.size());
  if (n < 8 || n % 2) throw ConfigError("kdv1d: n must be even and >= 8");
  if (nsteps < 1) throw ConfigError("kdv1d: nsteps must be positive");
  const double delta = c.a_4 / c.a_t;
  const double beta = c.a_n / c.a_t;
  const double h = tau_end / nsteps;

  std::vector<Complex> buf(n), spec(n);
  fftw_plan fwd = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(buf.data()),
                                   reinterpret_cast<fftw_complex*>(spec.data()), FFTW_FORWARD,
                                   FFTW_ESTIMATE);
  fftw_plan bwd = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(spec.data()),
                                   reinterpret_cast<fftw_complex*>(buf.data()), FFTW_BACKWARD,
                                   FFTW_ESTIMATE);

  auto k_of = [&](int m) {
    const int s = (m <= n / 2) ? m : m - n;
    return 2.0 * std::numbers::pi * s / L;
  };
  const int cut = n / 3;

  std::vector<Complex> E(n), E2(n);
  std::vector<double> mask(n);
  for (int m = 0; m < n; ++m) {
    const double k = k_of(m);
    const Complex Lm(0.0, delta * k * k * k);
    E2[m] = std::exp(0.5 * h * Lm);
    E[m] = std::exp(h * Lm);
    const int s = (m <= n / 2) ? m : m - n;
    mask[m] = (std::abs(s) <= cut && std::abs(s) != n / 2) ? 1.0 : 0.0;
  }

  std::vector<Complex> u(n);
  for (int i = 0; i < n; ++i) buf[i] = u0[i];
  fftw_execute(fwd);
  for (int m = 0; m < n; ++m) u[m] = spec[m] / static_cast<double>(n);

  auto nonlin = [&](const std::vector<Complex>& uh, std::vector<Complex>& out) {
    for (int m = 0; m < n; ++m) spec[m] = uh[m] * mask[m];
    fftw_execute(bwd);  // unnormalized inverse of coefficients = field values
    for (int i = 0; i < n; ++i) {
      const double v = buf[i].real();
      buf[i] = v * v;
    }
    fftw_execute(fwd);
    for (int m = 0; m < n; ++m)
      out[m] = Complex(0.0, -0.5 * beta * k_of(m)) * spec[m] / static_cast<double>(n) * mask[m];
  };

  std::vector<Complex> Nu(n), Na(n), Nb(n), Nc(n), a(n), b(n), cc(n);
  for (int s = 0; s < nsteps; ++s) {
    nonlin(u, Nu);
    for (int m = 0; m < n; ++m) a[m] = E2[m] * (u[m] + 0.5 * h * Nu[m]);
    nonlin(a, Na);
    for (int m = 0; m < n; ++m) b[m] = E2[m] * u[m] + 0.5 * h * Na[m];
    nonlin(b, Nb);
    for (int m = 0; m < n; ++m) cc[m] = E[m] * u[m] + h * E2[m] * Nb[m];
    nonlin(cc, Nc);
    for (int m = 0; m < n; ++m)
      u[m] = E[m] * u[m] +
             (h / 6.0) * (E[m] * Nu[m] + 2.0 * E2[m] * (Na[m] + Nb[m]) + Nc[m]);
  }

  for (int m = 0; m < n; ++m) spec[m] = u[m];
  fftw_execute(bwd);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = buf[i].real();
  fftw_destroy_plan(fwd);
  fftw_destroy_plan(bwd);
  return out;
}

}  // namespace kdv1d
}  // namespace kp2fpu
