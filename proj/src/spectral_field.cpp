#include "kp2fpu/spectral_field.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>

#include "kp2fpu/parallel.hpp"

namespace kp2fpu {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Plan cache. Plans are created with FFTW_ESTIMATE | FFTW_UNALIGNED so the
/// same plan works on any buffer and planning is reproducible run to run.
class FftEngine {
 public:
  static FftEngine& instance() {
    static FftEngine e;
    return e;
  }

  void forward(const Grid2D& g, const double* in, std::complex<double>* out) {
    const Plans& p = plans(g);
    std::vector<double> tmp(in, in + g.size());  // r2c may clobber input
    fftw_execute_dft_r2c(p.r2c, tmp.data(), reinterpret_cast<fftw_complex*>(out));
    const double scale = 1.0 / static_cast<double>(g.size());
    const long nspec = static_cast<long>(g.ny) * (g.nx / 2 + 1);
    for (long i = 0; i < nspec; ++i) out[i] *= scale;
  }

  void inverse(const Grid2D& g, const std::complex<double>* in, double* out) {
    const Plans& p = plans(g);
    const long nspec = static_cast<long>(g.ny) * (g.nx / 2 + 1);
    std::vector<std::complex<double>> tmp(in, in + nspec);  // c2r clobbers input
    fftw_execute_dft_c2r(p.c2r, reinterpret_cast<fftw_complex*>(tmp.data()), out);
  }

 private:
  struct Plans {
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
  };

  const Plans& plans(const Grid2D& g) {
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::make_pair(g.nx, g.ny);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    std::vector<double> rbuf(g.size());
    std::vector<std::complex<double>> cbuf(static_cast<long>(g.ny) * (g.nx / 2 + 1));
    Plans p;
    p.r2c = fftw_plan_dft_r2c_2d(g.ny, g.nx, rbuf.data(),
                                 reinterpret_cast<fftw_complex*>(cbuf.data()),
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.c2r = fftw_plan_dft_c2r_2d(g.ny, g.nx, reinterpret_cast<fftw_complex*>(cbuf.data()),
                                 rbuf.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    return cache_.emplace(key, p).first->second;
  }

  std::mutex mu_;
  std::map<std::pair<int, int>, Plans> cache_;
};

void check_same_grid(const Grid2D& a, const Grid2D& b, const char* op) {
  if (!(a == b)) throw ConfigError(std::string(op) + ": fields on different grids");
}

}  // namespace

SpectralField2D::SpectralField2D(const Grid2D& g)
    : grid_(g), vals_(g.size(), 0.0), spec_(static_cast<long>(g.ny) * (g.nx / 2 + 1), {0.0, 0.0}) {
  vals_ok_ = true;
  spec_ok_ = true;
}

SpectralField2D SpectralField2D::from_function(const Grid2D& g,
                                               const std::function<double(double, double)>& f) {
  SpectralField2D out(g);
  auto& v = out.mutable_values();
  for (int j = 0; j < g.ny; ++j) {
    const double y = g.y(j);
    for (int i = 0; i < g.nx; ++i) v[static_cast<long>(j) * g.nx + i] = f(g.x(i), y);
  }
  return out;
}

SpectralField2D SpectralField2D::random_band_limited(const Grid2D& g, int mx_max, int ny_max,
                                                     std::uint64_t seed) {
  mx_max = std::min(mx_max, g.nx / 2 - 1);
  ny_max = std::min(ny_max, g.ny / 2 - 1);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> amp(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  struct Mode {
    double kx, ky, a, ph;
  };
  std::vector<Mode> modes;
  for (int m = 1; m <= mx_max; ++m)
    for (int n = -ny_max; n <= ny_max; ++n)
      modes.push_back({kTwoPi * m / g.Lx, kTwoPi * n / g.Ly, amp(rng), phase(rng)});
  SpectralField2D out(g);
  auto& v = out.mutable_values();
  parallel_for(0, g.ny, [&](long j0, long j1) {
    for (long j = j0; j < j1; ++j) {
      const double y = g.y(static_cast<int>(j));
      for (int i = 0; i < g.nx; ++i) {
        const double x = g.x(i);
        double s = 0.0;
        for (const Mode& md : modes) s += md.a * std::cos(md.kx * x + md.ky * y + md.ph);
        v[j * g.nx + i] = s;
      }
    }
  });
  return out;
}

void SpectralField2D::ensure_values() const {
  if (vals_ok_) return;
  vals_.resize(grid_.size());
  FftEngine::instance().inverse(grid_, spec_.data(), vals_.data());
  vals_ok_ = true;
}

void SpectralField2D::ensure_spectrum() const {
  if (spec_ok_) return;
  spec_.resize(static_cast<long>(grid_.ny) * spec_cols());
  FftEngine::instance().forward(grid_, vals_.data(), spec_.data());
  spec_ok_ = true;
}

const std::vector<double>& SpectralField2D::values() const {
  ensure_values();
  return vals_;
}

const std::vector<SpectralField2D::Complex>& SpectralField2D::spectrum() const {
  ensure_spectrum();
  return spec_;
}

std::vector<double>& SpectralField2D::mutable_values() {
  ensure_values();
  invalidate_spectrum();
  return vals_;
}

std::vector<SpectralField2D::Complex>& SpectralField2D::mutable_spectrum() {
  ensure_spectrum();
  invalidate_values();
  return spec_;
}

double SpectralField2D::kx(int m) const { return kTwoPi * m / grid_.Lx; }

double SpectralField2D::ky(int n) const {
  const int s = (n <= grid_.ny / 2) ? n : n - grid_.ny;
  return kTwoPi * s / grid_.Ly;
}

SpectralField2D SpectralField2D::derivative(int p, int q) const {
  if (p < 0 || q < 0) throw ConfigError("derivative orders must be nonnegative");
  ensure_spectrum();
  SpectralField2D out(grid_);
  auto& os = out.mutable_spectrum();
  const int cols = spec_cols();
  const bool zero_nyq_x = (p % 2) != 0;
  const bool zero_nyq_y = (q % 2) != 0;
  for (int n = 0; n < grid_.ny; ++n) {
    const Complex iky(0.0, ky(n));
    const bool nyq_y = (n == grid_.ny / 2);
    for (int m = 0; m < cols; ++m) {
      const bool nyq_x = (m == grid_.nx / 2);
      if ((zero_nyq_x && nyq_x) || (zero_nyq_y && nyq_y)) {
        os[static_cast<long>(n) * cols + m] = 0.0;
        continue;
      }
      Complex fac(1.0, 0.0);
      const Complex ikx(0.0, kx(m));
      for (int a = 0; a < p; ++a) fac *= ikx;
      for (int a = 0; a < q; ++a) fac *= iky;
      os[static_cast<long>(n) * cols + m] = spec_[static_cast<long>(n) * cols + m] * fac;
    }
  }
  return out;
}

SpectralField2D SpectralField2D::antiderivative_xi(int power) const {
  if (power < 1 || power > 4) throw ConfigError("antiderivative_xi: power must be in 1..4");
  ensure_spectrum();
  const double mean = xi_mean_magnitude();
  const double ref = std::max(sup_norm(), 1e-300);
  if (mean > 1e-10 * ref)
    throw ConstraintError(
        "antiderivative_xi: field has nonzero xi-mean content (|c(kxi=0)| = " +
        std::to_string(mean) + ", sup = " + std::to_string(ref) +
        "); project the kxi = 0 modes first (zero xi-mean is required per eta row)");
  SpectralField2D out(grid_);
  auto& os = out.mutable_spectrum();
  const int cols = spec_cols();
  for (int n = 0; n < grid_.ny; ++n) {
    for (int m = 0; m < cols; ++m) {
      const long id = static_cast<long>(n) * cols + m;
      if (m == 0 || m == grid_.nx / 2) {
        os[id] = 0.0;
        continue;
      }
      Complex fac(1.0, 0.0);
      const Complex ikx(0.0, kx(m));
      for (int a = 0; a < power; ++a) fac /= ikx;
      os[id] = spec_[id] * fac;
    }
  }
  return out;
}

SpectralField2D SpectralField2D::shifted(double dx, double dy) const {
  ensure_spectrum();
  SpectralField2D out(grid_);
  auto& os = out.mutable_spectrum();
  const int cols = spec_cols();
  // Nyquist phases must stay real for the output to be a real field; for
  // grid-commensurate shifts they are exactly +-1, otherwise the mode is dropped.
  for (int n = 0; n < grid_.ny; ++n) {
    const double phy = ky(n) * dy;
    const Complex ey(std::cos(phy), std::sin(phy));
    const bool nyq_y = (n == grid_.ny / 2);
    for (int m = 0; m < cols; ++m) {
      const long id = static_cast<long>(n) * cols + m;
      const double phx = kx(m) * dx;
      Complex fac = Complex(std::cos(phx), std::sin(phx)) * ey;
      const bool nyq_x = (m == grid_.nx / 2);
      if (nyq_x || nyq_y) {
        if (std::abs(fac.imag()) > 1e-12)
          fac = 0.0;
        else
          fac = fac.real();
      }
      os[id] = spec_[id] * fac;
    }
  }
  return out;
}

SpectralField2D SpectralField2D::zero_mean_projected() const {
  ensure_spectrum();
  SpectralField2D out = *this;
  auto& os = out.mutable_spectrum();
  const int cols = spec_cols();
  for (int n = 0; n < grid_.ny; ++n) os[static_cast<long>(n) * cols] = 0.0;
  return out;
}

SpectralField2D SpectralField2D::resampled(const Grid2D& finer) const {
  if (finer.nx < grid_.nx || finer.ny < grid_.ny)
    throw ConfigError("resampled: target grid must be at least as fine");
  if (std::abs(finer.Lx - grid_.Lx) > 1e-9 * grid_.Lx ||
      std::abs(finer.Ly - grid_.Ly) > 1e-9 * grid_.Ly)
    throw ConfigError("resampled: target grid must cover the same box");
  ensure_spectrum();
  SpectralField2D out(finer);
  auto& os = out.mutable_spectrum();
  const int cols_in = spec_cols();
  const int cols_out = finer.nx / 2 + 1;
  for (int n = 0; n < grid_.ny; ++n) {
    const int sn = (n <= grid_.ny / 2) ? n : n - grid_.ny;
    if (std::abs(sn) == grid_.ny / 2 && finer.ny != grid_.ny) continue;  // drop source Nyquist
    const int n_out = (sn >= 0) ? sn : sn + finer.ny;
    for (int m = 0; m < cols_in; ++m) {
      if (m == grid_.nx / 2 && finer.nx != grid_.nx) continue;
      os[static_cast<long>(n_out) * cols_out + m] = spec_[static_cast<long>(n) * cols_in + m];
    }
  }
  return out;
}

SpectralField2D& SpectralField2D::operator+=(const SpectralField2D& o) {
  check_same_grid(grid_, o.grid_, "operator+=");
  o.ensure_spectrum();
  auto& s = mutable_spectrum();
  for (long i = 0; i < static_cast<long>(s.size()); ++i) s[i] += o.spec_[i];
  return *this;
}

SpectralField2D& SpectralField2D::operator-=(const SpectralField2D& o) {
  check_same_grid(grid_, o.grid_, "operator-=");
  o.ensure_spectrum();
  auto& s = mutable_spectrum();
  for (long i = 0; i < static_cast<long>(s.size()); ++i) s[i] -= o.spec_[i];
  return *this;
}

SpectralField2D& SpectralField2D::operator*=(double sc) {
  auto& s = mutable_spectrum();
  for (auto& c : s) c *= sc;
  return *this;
}

double SpectralField2D::xi_mean_magnitude() const {
  ensure_spectrum();
  const int cols = spec_cols();
  double mx = 0.0;
  for (int n = 0; n < grid_.ny; ++n)
    mx = std::max(mx, std::abs(spec_[static_cast<long>(n) * cols]));
  return mx;
}

bool SpectralField2D::has_zero_xi_mean(double rel_tol) const {
  return xi_mean_magnitude() <= rel_tol * std::max(sup_norm(), 1e-300);
}

double SpectralField2D::sup_norm() const {
  ensure_values();
  double mx = 0.0;
  for (double v : vals_) mx = std::max(mx, std::abs(v));
  return mx;
}

double SpectralField2D::l2_grid_norm() const {
  ensure_values();
  double s = 0.0;
  for (double v : vals_) s += v * v;
  return std::sqrt(s * grid_.dx() * grid_.dy());
}

double SpectralField2D::hs_norm(double s, int dxi, int deta) const {
  if (s < 0.0) throw ConfigError("hs_norm: s must be >= 0");
  if (deta < 0) throw ConfigError("hs_norm: eta order must be >= 0");
  ensure_spectrum();
  if (dxi < 0) {
    const double mean = xi_mean_magnitude();
    if (mean > 1e-10 * std::max(sup_norm(), 1e-300))
      throw ConstraintError("hs_norm: antiderivative prefactor on nonzero kxi = 0 content");
  }
  const int cols = spec_cols();
  double acc = 0.0;
  for (int n = 0; n < grid_.ny; ++n) {
    const double kyv = ky(n);
    for (int m = 0; m < cols; ++m) {
      const double kxv = kx(m);
      if (m == 0 && dxi < 0) continue;
      double amp2 = std::norm(spec_[static_cast<long>(n) * cols + m]);
      if (amp2 == 0.0) continue;
      double fac = 1.0;
      if (dxi > 0) fac *= std::pow(kxv, dxi);
      if (dxi < 0) fac /= std::pow(kxv, -dxi);
      if (deta > 0) fac *= std::pow(std::abs(kyv), deta);
      const double w = std::pow(1.0 + kxv * kxv + kyv * kyv, s);
      const double mult = (m == 0 || m == grid_.nx / 2) ? 1.0 : 2.0;
      acc += mult * w * fac * fac * amp2;
    }
  }
  return std::sqrt(acc * grid_.Lx * grid_.Ly);
}

double SpectralField2D::sampled_lattice_l2(const LatticeGrid& lat) const {
  if (lat.nj < grid_.nx || lat.nk < grid_.ny)
    throw ConfigError("sampled_lattice_l2: lattice must resolve the field's band limit");
  ensure_spectrum();
  const int cols = spec_cols();
  double acc = 0.0;
  for (int n = 0; n < grid_.ny; ++n) {
    for (int m = 0; m < cols; ++m) {
      const double mult = (m == 0 || m == grid_.nx / 2) ? 1.0 : 2.0;
      acc += mult * std::norm(spec_[static_cast<long>(n) * cols + m]);
    }
  }
  return std::sqrt(acc * static_cast<double>(lat.size()));
}

bool SpectralField2D::all_finite() const {
  ensure_values();
  for (double v : vals_)
    if (!std::isfinite(v)) return false;
  return true;
}

SpectralField2D operator+(SpectralField2D a, const SpectralField2D& b) {
  a += b;
  return a;
}

SpectralField2D operator-(SpectralField2D a, const SpectralField2D& b) {
  a -= b;
  return a;
}

SpectralField2D operator*(double s, SpectralField2D f) {
  f *= s;
  return f;
}

SpectralField2D product(const SpectralField2D& a, const SpectralField2D& b) {
  if (!(a.grid() == b.grid())) throw ConfigError("product: fields on different grids");
  SpectralField2D out(a.grid());
  auto& ov = out.mutable_values();
  const auto& av = a.values();
  const auto& bv = b.values();
  for (long i = 0; i < static_cast<long>(ov.size()); ++i) ov[i] = av[i] * bv[i];
  return out;
}

namespace detail {

void fft_forward(const Grid2D& g, const double* in, std::complex<double>* out) {
  FftEngine::instance().forward(g, in, out);
}

void fft_inverse(const Grid2D& g, const std::complex<double>* in, double* out) {
  FftEngine::instance().inverse(g, in, out);
}

}  // namespace detail

}  // namespace kp2fpu
