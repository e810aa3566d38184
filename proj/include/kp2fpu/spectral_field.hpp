#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "kp2fpu/grid.hpp"

namespace kp2fpu {

/// Real periodic field on a Grid2D together with its Fourier coefficients.
///
/// Both representations are kept lazily in sync. Coefficients are stored in
/// r2c half-spectrum layout (ny rows x (nx/2+1) columns, xi-frequency
/// contiguous) and normalized so that
///   f(x,y) = sum_k c_k exp(i(kx x + ky y)),  kx = 2 pi m / Lx, m = 0..nx/2.
/// Linear operations (+, -, scaling, derivatives, antiderivatives, shifts)
/// act on the spectrum; pointwise products act on grid values.
class SpectralField2D {
 public:
  using Complex = std::complex<double>;

  SpectralField2D() = default;
  explicit SpectralField2D(const Grid2D& g);

  static SpectralField2D from_function(const Grid2D& g,
                                       const std::function<double(double, double)>& f);

  /// Band-limited field from a deterministic seed: a sum of cosine modes with
  /// |m| <= mx_max, |n| <= ny_max (xi-mean removed).
  static SpectralField2D random_band_limited(const Grid2D& g, int mx_max, int ny_max,
                                             std::uint64_t seed);

  const Grid2D& grid() const { return grid_; }

  const std::vector<double>& values() const;
  const std::vector<Complex>& spectrum() const;
  std::vector<double>& mutable_values();
  std::vector<Complex>& mutable_spectrum();

  int spec_cols() const { return grid_.nx / 2 + 1; }
  double kx(int m) const;
  double ky(int n) const;  // n = row index, signed frequency

  // --- spectral operations (return new fields) ---
  SpectralField2D derivative(int p, int q) const;
  SpectralField2D antiderivative_xi(int power) const;
  SpectralField2D shifted(double dx, double dy) const;  // g(x,y) = f(x+dx, y+dy)
  SpectralField2D zero_mean_projected() const;
  /// Zero-pad embedding onto a finer grid over the same box.
  SpectralField2D resampled(const Grid2D& finer) const;

  SpectralField2D& operator+=(const SpectralField2D& o);
  SpectralField2D& operator-=(const SpectralField2D& o);
  SpectralField2D& operator*=(double s);

  // --- diagnostics and norms ---
  /// max over eta rows of |kxi = 0 coefficient|.
  double xi_mean_magnitude() const;
  bool has_zero_xi_mean(double rel_tol = 1e-10) const;

  double sup_norm() const;
  /// Continuum L2 norm, sqrt(dx dy sum v^2) = sqrt(Lx Ly sum |c|^2).
  double l2_grid_norm() const;
  /// Sobolev norm with weight <kx,ky>_2^s = (1 + kx^2 + ky^2)^{s/2}.
  double hs_norm(double s) const { return hs_norm(s, 0, 0); }
  /// Same, after applying the multiplier (i kx)^dxi (i ky)^deta; dxi may be
  /// negative (antiderivative), which requires zero xi-mean content.
  double hs_norm(double s, int dxi, int deta) const;
  /// l2 norm over an nj x nk sampling lattice of this box (exact for fields
  /// band-limited within the lattice Nyquist; shift-invariant).
  double sampled_lattice_l2(const LatticeGrid& lat) const;

  bool all_finite() const;

 private:
  void ensure_values() const;
  void ensure_spectrum() const;
  void invalidate_spectrum() { spec_ok_ = false; }
  void invalidate_values() { vals_ok_ = false; }

  Grid2D grid_;
  mutable std::vector<double> vals_;
  mutable std::vector<Complex> spec_;
  mutable bool vals_ok_ = false;
  mutable bool spec_ok_ = false;
};

SpectralField2D operator+(SpectralField2D a, const SpectralField2D& b);
SpectralField2D operator-(SpectralField2D a, const SpectralField2D& b);
SpectralField2D operator*(double s, SpectralField2D f);
/// Pointwise product on grid values.
SpectralField2D product(const SpectralField2D& a, const SpectralField2D& b);

namespace detail {
// Raw planned transforms (normalized forward), for inner solver loops.
void fft_forward(const Grid2D& g, const double* in, std::complex<double>* out);
void fft_inverse(const Grid2D& g, const std::complex<double>* in, double* out);
}  // namespace detail

}  // namespace kp2fpu
