#include "kp2fpu/run_config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "kp2fpu/ansatz.hpp"
#include "kp2fpu/errors.hpp"

namespace kp2fpu {

int nice_even_size(double target) {
  if (!(target >= 4.0)) throw ConfigError("nice_even_size: target too small");
  auto smooth7 = [](long n) {
    for (long p : {2L, 3L, 5L, 7L})
      while (n % p == 0) n /= p;
    return n == 1;
  };
  const long lo = std::max(4L, static_cast<long>(std::floor(target * 0.93)));
  const long hi = static_cast<long>(std::ceil(target * 1.07)) + 1;
  long best = -1;
  double best_d = 1e300;
  for (long n = lo; n <= hi; ++n) {
    if (n % 2) continue;
    if (!smooth7(n)) continue;
    const double d = std::abs(n - target);
    if (d < best_d) {
      best_d = d;
      best = n;
    }
  }
  if (best < 0) {
    best = static_cast<long>(std::lround(target));
    if (best % 2) ++best;
  }
  return static_cast<int>(best);
}

namespace config {

using nlohmann::json;

double RunConfig::Lxi() const { return Lxi_over_pi * std::numbers::pi; }
double RunConfig::Leta_nominal() const { return Leta_over_pi * std::numbers::pi; }

verify::ComparisonSpec RunConfig::comparison_spec(double eps_nominal) const {
  verify::ComparisonSpec s;
  s.frame = ansatz::frame_from_string(frame);
  s.params = params;
  s.eps_nominal = eps_nominal;
  s.Lxi = Lxi();
  s.Leta_nominal = Leta_nominal();
  s.solver_neta = solver_neta;
  s.tau0 = tau0;
  s.dt = dt;
  s.dtau = dtau;
  s.observer_stride = observer_stride;
  s.preset = initial_data;
  s.coercivity_k0 = coercivity_k0;
  return s;
}

namespace {

const json& require(const json& j, const std::string& key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError("config: missing required field '" + path + "'");
  return *it;
}

template <typename T>
void opt(const json& j, const char* key, T& dst) {
  if (auto it = j.find(key); it != j.end()) dst = it->get<T>();
}

}  // namespace

std::string serialize(const RunConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["frame"] = c.frame;
  j["params"] = {{"c1", c.params.c1},
                 {"c2", c.params.c2},
                 {"alpha1", c.params.alpha1},
                 {"alpha2", c.params.alpha2}};
  j["eps_list"] = c.eps_list;
  j["box"] = {{"Lxi_over_pi", c.Lxi_over_pi}, {"Leta_over_pi", c.Leta_over_pi}};
  j["solver_neta"] = c.solver_neta;
  j["tau0"] = c.tau0;
  j["dt"] = c.dt;
  j["dtau"] = c.dtau;
  j["initial_data"] = {{"preset", c.initial_data.name},
                       {"amplitude", c.initial_data.amplitude},
                       {"kappa", c.initial_data.kappa},
                       {"delta", c.initial_data.delta},
                       {"sigma_xi", c.initial_data.sigma_xi},
                       {"sigma_eta", c.initial_data.sigma_eta}};
  j["observer_stride"] = c.observer_stride;
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["coercivity_k0"] = c.coercivity_k0;
  j["thresholds"] = {{"residual_slope_min", c.residual_slope_min},
                     {"residual_slope_z_min", c.residual_slope_z_min},
                     {"error_slope_min", c.error_slope_min}};
  j["synthetic"] = c.synthetic;
  j["synthetic_exponent"] = c.synthetic_exponent;
  j["sample_bound"] = {{"s", c.sample_bound_s},
                       {"samples", c.sample_bound_samples},
                       {"modes_xi", c.sample_bound_modes_xi},
                       {"modes_eta", c.sample_bound_modes_eta}};
  j["save_fields"] = c.save_fields;
  return j.dump(2);
}

RunConfig deserialize(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  RunConfig c;
  opt(j, "schema_version", c.schema_version);
  if (c.schema_version != 1)
    throw ConfigError("config: unsupported schema_version " + std::to_string(c.schema_version));
  c.frame = require(j, "frame", "frame").get<std::string>();
  ansatz::frame_from_string(c.frame);
  if (j.contains("eps_list")) {
    c.eps_list = j["eps_list"].get<std::vector<double>>();
  } else if (j.contains("eps")) {
    c.eps_list = {j["eps"].get<double>()};
  } else {
    throw ConfigError("config: missing required field 'eps' (or 'eps_list')");
  }
  if (c.eps_list.empty()) throw ConfigError("config: 'eps_list' must not be empty");
  for (double e : c.eps_list)
    if (!(e > 0.0) || !(e < 1.0)) throw ConfigError("config: eps values must lie in (0,1)");
  if (auto it = j.find("params"); it != j.end()) {
    opt(*it, "c1", c.params.c1);
    opt(*it, "c2", c.params.c2);
    opt(*it, "alpha1", c.params.alpha1);
    opt(*it, "alpha2", c.params.alpha2);
  }
  c.params.validate();
  if (auto it = j.find("box"); it != j.end()) {
    opt(*it, "Lxi_over_pi", c.Lxi_over_pi);
    opt(*it, "Leta_over_pi", c.Leta_over_pi);
  }
  opt(j, "solver_neta", c.solver_neta);
  opt(j, "tau0", c.tau0);
  opt(j, "dt", c.dt);
  opt(j, "dtau", c.dtau);
  {
    const json& id = require(j, "initial_data", "initial_data");
    c.initial_data.name = require(id, "preset", "initial_data.preset").get<std::string>();
    opt(id, "amplitude", c.initial_data.amplitude);
    opt(id, "kappa", c.initial_data.kappa);
    opt(id, "delta", c.initial_data.delta);
    opt(id, "sigma_xi", c.initial_data.sigma_xi);
    opt(id, "sigma_eta", c.initial_data.sigma_eta);
  }
  opt(j, "observer_stride", c.observer_stride);
  opt(j, "output_dir", c.output_dir);
  opt(j, "seed", c.seed);
  opt(j, "threads", c.threads);
  opt(j, "coercivity_k0", c.coercivity_k0);
  if (auto it = j.find("thresholds"); it != j.end()) {
    opt(*it, "residual_slope_min", c.residual_slope_min);
    opt(*it, "residual_slope_z_min", c.residual_slope_z_min);
    opt(*it, "error_slope_min", c.error_slope_min);
  }
  opt(j, "synthetic", c.synthetic);
  opt(j, "synthetic_exponent", c.synthetic_exponent);
  if (auto it = j.find("sample_bound"); it != j.end()) {
    opt(*it, "s", c.sample_bound_s);
    opt(*it, "samples", c.sample_bound_samples);
    opt(*it, "modes_xi", c.sample_bound_modes_xi);
    opt(*it, "modes_eta", c.sample_bound_modes_eta);
  }
  opt(j, "save_fields", c.save_fields);
  if (c.tau0 < 0.0) throw ConfigError("config: tau0 must be nonnegative");
  if (!(c.dtau > 0.0)) throw ConfigError("config: dtau must be positive");
  if (c.observer_stride < 1) throw ConfigError("config: observer_stride must be >= 1");
  return c;
}

RunConfig load_file(const std::string& path, bool apply_env) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  RunConfig c = deserialize(ss.str());
  if (apply_env) apply_env_overrides(c);
  return c;
}

void apply_env_overrides(RunConfig& c) {
  if (const char* v = std::getenv("KP2FPU_THREADS")) c.threads = std::atoi(v);
  if (const char* v = std::getenv("KP2FPU_OUT")) c.output_dir = v;
  if (const char* v = std::getenv("KP2FPU_SEED")) c.seed = std::strtoull(v, nullptr, 10);
}

}  // namespace config
}  // namespace kp2fpu
