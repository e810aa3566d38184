#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kp2fpu/kp2.hpp"
#include "kp2fpu/model_params.hpp"
#include "kp2fpu/verify.hpp"

namespace kp2fpu {
namespace config {

/// Run configuration (JSON, versioned). Required fields: frame, eps or
/// eps_list, initial_data.preset. Everything else has defaults.
struct RunConfig {
  int schema_version = 1;
  std::string frame = "horizontal";
  ModelParams params;
  std::vector<double> eps_list;
  double Lxi_over_pi = 32.0;
  double Leta_over_pi = 16.0;
  int solver_neta = 160;
  double tau0 = 0.25;
  double dt = 0.0;  // 0 = default min(0.05, 0.25/max(c1,c2))
  double dtau = 0.002;
  kp2::PresetSpec initial_data;
  int observer_stride = 50;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  int threads = 0;
  double coercivity_k0 = 10.0;
  // sweep thresholds
  double residual_slope_min = 3.3;
  double residual_slope_z_min = 4.3;
  double error_slope_min = 2.3;
  // synthetic sweep mode: skip dynamics, inject eps^exponent data
  bool synthetic = false;
  double synthetic_exponent = 2.5;
  // sample-bound settings
  double sample_bound_s = 2.0;
  int sample_bound_samples = 5;
  int sample_bound_modes_xi = 6;
  int sample_bound_modes_eta = 4;
  // snapshot export
  bool save_fields = false;

  double Lxi() const;
  double Leta_nominal() const;
  verify::ComparisonSpec comparison_spec(double eps_nominal) const;
};

std::string serialize(const RunConfig& c);
RunConfig deserialize(const std::string& json_text);
RunConfig load_file(const std::string& path, bool apply_env = true);
void apply_env_overrides(RunConfig& c);

}  // namespace config
}  // namespace kp2fpu
