#pragma once

#include <cmath>
#include <string>

#include "kp2fpu/errors.hpp"

namespace kp2fpu {

/// Uniform periodic rectangle [0,Lx) x [0,Ly), x = xi (fast index),
/// y = eta (slow index). Row-major storage, idx = iy*nx + ix.
struct Grid2D {
  int nx = 0;
  int ny = 0;
  double Lx = 0.0;
  double Ly = 0.0;

  Grid2D() = default;
  Grid2D(int nx_, int ny_, double Lx_, double Ly_) : nx(nx_), ny(ny_), Lx(Lx_), Ly(Ly_) {
    if (nx < 4 || ny < 4 || nx % 2 || ny % 2)
      throw ConfigError("Grid2D: nx, ny must be even and >= 4 (got " + std::to_string(nx) +
                        "x" + std::to_string(ny) + ")");
    if (!(Lx > 0.0) || !(Ly > 0.0)) throw ConfigError("Grid2D: box lengths must be positive");
  }

  long size() const { return static_cast<long>(nx) * ny; }
  double dx() const { return Lx / nx; }
  double dy() const { return Ly / ny; }
  double x(int i) const { return i * dx(); }
  double y(int j) const { return j * dy(); }
  bool operator==(const Grid2D& o) const = default;
};

/// Periodic lattice index box. First index j (fast, row-major j-fastest),
/// second index k. Offsets record how indices map to the paper-frame (j,k).
struct LatticeGrid {
  int nj = 0;
  int nk = 0;
  int j0 = 0;
  int k0 = 0;

  LatticeGrid() = default;
  LatticeGrid(int nj_, int nk_, int j0_ = 0, int k0_ = 0) : nj(nj_), nk(nk_), j0(j0_), k0(k0_) {
    if (nj < 4 || nk < 4 || nj % 2 || nk % 2)
      throw ConfigError("LatticeGrid: nj, nk must be even and >= 4 (got " +
                        std::to_string(nj) + "x" + std::to_string(nk) + ")");
  }

  long size() const { return static_cast<long>(nj) * nk; }
  long idx(int j, int k) const { return static_cast<long>(k) * nj + j; }
  bool operator==(const LatticeGrid& o) const = default;
};

/// Nearest even 7-smooth integer to target (FFT-friendly transform sizes).
int nice_even_size(double target);

}  // namespace kp2fpu
