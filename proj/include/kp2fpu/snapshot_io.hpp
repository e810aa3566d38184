#pragma once

#include <string>

#include "kp2fpu/lattice.hpp"
#include "kp2fpu/spectral_field.hpp"

namespace kp2fpu {
namespace io {

/// Writes <base>.f64 (flat little-endian float64, row-major, first index
/// fastest, fields concatenated in declaration order) and <base>.json (grid,
/// time, field order). Files are written atomically (tmp + rename).
void write_snapshot(const std::string& base, const lattice::StateH& s, double eps);
void write_snapshot(const std::string& base, const lattice::StateD& s, double eps);
void write_snapshot(const std::string& base, const SpectralField2D& f, double tau,
                    const std::string& name);

/// Reads back a lattice snapshot written by write_snapshot (for tests).
lattice::StateH read_snapshot_h(const std::string& base);

}  // namespace io
}  // namespace kp2fpu
