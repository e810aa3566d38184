// Command-line driver: simulate / sweep / kp2 / sample-bound / residuals.
// Outputs are deterministic for a fixed config and seed; norm reductions run
// in fixed order regardless of --threads.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kp2fpu/ansatz.hpp"
#include "kp2fpu/errors.hpp"
#include "kp2fpu/kdv_reference.hpp"
#include "kp2fpu/kp2.hpp"
#include "kp2fpu/parallel.hpp"
#include "kp2fpu/run_config.hpp"
#include "kp2fpu/snapshot_io.hpp"
#include "kp2fpu/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace kp2fpu;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct CommonOpts {
  std::string config_path;
  std::string out_override;
  int threads_override = -1;
  std::string frame_override;
};

config::RunConfig load(const CommonOpts& o) {
  config::RunConfig c = config::load_file(o.config_path);
  if (!o.out_override.empty()) c.output_dir = o.out_override;
  if (o.threads_override >= 0) c.threads = o.threads_override;
  if (!o.frame_override.empty()) c.frame = o.frame_override;
  ansatz::frame_from_string(c.frame);
  set_num_threads(c.threads);
  fs::create_directories(c.output_dir);
  return c;
}

void write_text(const std::string& path, const std::string& data) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw ConfigError("cannot write '" + path + "'");
  }
  fs::rename(tmp, path);
}

json report_json(const verify::RunReport& r) {
  json j;
  j["frame"] = ansatz::to_string(r.frame);
  j["eps_nominal"] = r.eps_nominal;
  j["eps"] = r.eps;
  j["nj"] = r.nj;
  j["nk"] = r.nk;
  j["solver_neta"] = r.solver_ny;
  j["Lxi"] = r.Lxi;
  j["Leta"] = r.Leta;
  j["dt"] = r.dt;
  j["observations"] = r.obs.size();
  json res;
  for (auto& [k, v] : r.residual_norms_t0) res[k] = v;
  j["residual_norms_t0"] = res;
  j["max_Q"] = r.max_Q;
  j["max_Q_over_sqrt_eps"] = r.max_Q / std::sqrt(r.eps);
  j["max_total_error_leading"] = r.max_total_theorem;
  j["max_total_error_ansatz"] = r.max_total_ansatz;
  j["energy_ratio_max"] = r.energy_ratio_max;
  j["coercivity_max"] = r.coercivity_max;
  j["coercivity_flagged"] = r.coercivity_flagged;
  j["hamiltonian_rel_drift"] = r.hamiltonian_rel_drift;
  j["kp2_l2_rel_drift"] = r.kp2_diagnostics.l2_max_rel_drift;
  j["kp2_zero_mode_rel"] = r.kp2_diagnostics.max_zero_mode_rel;
  j["failed"] = r.failed;
  if (r.failed) {
    j["failure_time"] = r.failure_time;
    j["failure_reason"] = r.failure_reason;
  }
  return j;
}

void export_bundle_fields(const config::RunConfig& c, const verify::ResolvedGrids& rg,
                          const kp2::Coefficients& coeffs, double eps) {
  const SpectralField2D A0 = kp2::make_initial_data(rg.solver, c.initial_data, coeffs);
  const std::string dir = c.output_dir + "/fields";
  fs::create_directories(dir);
  auto save = [&](const std::string& name, const SpectralField2D& f) {
    io::write_snapshot(dir + "/" + name, f, 0.0, name);
  };
  if (c.frame == "horizontal") {
    ansatz::HorizontalBundle b = ansatz::build_horizontal(A0, c.params, eps);
    for (auto& [name, f] : b.fields()) save(name, *f);
  } else {
    ansatz::DiagonalBundle b = ansatz::build_diagonal(A0, c.params, eps);
    for (auto& [name, f] : b.fields()) save(name, *f);
  }
}

int cmd_simulate(const CommonOpts& o) {
  config::RunConfig c = load(o);
  verify::ComparisonSpec spec = c.comparison_spec(c.eps_list.front());
  verify::RunReport rep = verify::run_comparison(spec);
  write_text(c.output_dir + "/simulate.csv", verify::report_csv(rep));
  write_text(c.output_dir + "/simulate.json", report_json(rep).dump(2) + "\n");
  if (c.save_fields) {
    verify::ResolvedGrids rg =
        verify::resolve_grids(spec.eps_nominal, spec.Lxi, spec.Leta_nominal, spec.solver_neta);
    const kp2::Coefficients coeffs = (spec.frame == ansatz::Frame::horizontal)
                                         ? kp2::Coefficients::horizontal(c.params)
                                         : kp2::Coefficients::diagonal(c.params);
    export_bundle_fields(c, rg, coeffs, rep.eps);
  }
  if (rep.failed) {
    std::cerr << "simulate: run failed at t = " << rep.failure_time << ": "
              << rep.failure_reason << "\n";
    return kExitRuntime;
  }
  std::cout << "simulate: wrote " << c.output_dir << "/simulate.csv ("
            << rep.obs.size() << " observations, eps = " << rep.eps << ")\n";
  return 0;
}

json slope_json(const verify::SlopeFit& f, double threshold, bool bigger_is_pass) {
  json j;
  j["slope"] = f.slope;
  j["half_width"] = f.half_width;
  j["threshold"] = threshold;
  j["pass"] = bigger_is_pass ? (f.slope >= threshold) : (f.slope <= threshold);
  return j;
}

int cmd_sweep(const CommonOpts& o) {
  config::RunConfig c = load(o);
  if (c.eps_list.size() < 3 && !c.synthetic)
    throw ConfigError("sweep: need at least 3 eps values");
  json summary;
  summary["frame"] = c.frame;
  bool any_failed = false;

  if (c.synthetic) {
    // plumbing check: inject data with a known power law and fit it
    std::vector<std::pair<double, double>> pts;
    for (double e : c.eps_list) pts.emplace_back(e, std::pow(e, c.synthetic_exponent));
    verify::SlopeFit f = verify::fit_slope(pts);
    summary["synthetic"] = true;
    summary["error_slope"] = slope_json(f, c.error_slope_min, true);
    write_text(c.output_dir + "/sweep.json", summary.dump(2) + "\n");
    std::cout << "sweep(synthetic): slope = " << f.slope << "\n";
    return 0;
  }

  std::vector<std::pair<double, double>> res_u1, res_u2, res_w, res_z, err_ansatz, err_lead;
  json members = json::array();
  for (double eps_nom : c.eps_list) {
    verify::ComparisonSpec spec = c.comparison_spec(eps_nom);
    verify::RunReport rep = verify::run_comparison(spec);
    char tag[32];
    std::snprintf(tag, sizeof tag, "eps%.4f", rep.eps);
    write_text(c.output_dir + "/sweep_" + tag + ".csv", verify::report_csv(rep));
    members.push_back(report_json(rep));
    if (rep.failed) {
      any_failed = true;
      continue;
    }
    for (auto& [k, v] : rep.residual_norms_t0) {
      if (k == "res_u1" || k == "res_x") res_u1.emplace_back(rep.eps, v);
      if (k == "res_u2" || k == "res_y") res_u2.emplace_back(rep.eps, v);
      if (k == "res_w" || k == "res_u") res_w.emplace_back(rep.eps, v);
      if (k == "res_z") res_z.emplace_back(rep.eps, v);
    }
    err_ansatz.emplace_back(rep.eps, rep.max_total_ansatz);
    err_lead.emplace_back(rep.eps, rep.max_total_theorem);
  }
  summary["members"] = members;
  if (res_u1.size() >= 3)
    summary["residual_slope_u1"] = slope_json(verify::fit_slope(res_u1), c.residual_slope_min, true);
  if (res_u2.size() >= 3)
    summary["residual_slope_u2"] = slope_json(verify::fit_slope(res_u2), c.residual_slope_min, true);
  if (res_w.size() >= 3)
    summary["residual_slope_w"] = slope_json(verify::fit_slope(res_w), c.residual_slope_min, true);
  if (res_z.size() >= 3)
    summary["residual_slope_z"] =
        slope_json(verify::fit_slope(res_z), c.residual_slope_z_min, true);
  if (err_ansatz.size() >= 3) {
    summary["error_slope"] = slope_json(verify::fit_slope(err_ansatz), c.error_slope_min, true);
    summary["error_slope_leading"] = verify::fit_slope(err_lead).slope;
    double qmin = 1e300, qmax = 0.0;
    for (auto& m : summary["members"]) {
      if (m["failed"].get<bool>()) continue;
      const double q = m["max_Q_over_sqrt_eps"].get<double>();
      qmin = std::min(qmin, q);
      qmax = std::max(qmax, q);
    }
    summary["gronwall_envelope_spread"] = (qmin > 0.0) ? qmax / qmin : 0.0;
  }
  summary["any_member_failed"] = any_failed;
  write_text(c.output_dir + "/sweep.json", summary.dump(2) + "\n");
  std::cout << "sweep: wrote " << c.output_dir << "/sweep.json\n";
  return any_failed ? kExitRuntime : 0;
}

int cmd_kp2(const CommonOpts& o) {
  config::RunConfig c = load(o);
  const double eps_nom = c.eps_list.front();
  verify::ResolvedGrids rg =
      verify::resolve_grids(eps_nom, c.Lxi(), c.Leta_nominal(), c.solver_neta);
  const kp2::Coefficients coeffs = (c.frame == "horizontal")
                                       ? kp2::Coefficients::horizontal(c.params)
                                       : kp2::Coefficients::diagonal(c.params);
  SpectralField2D A0 = kp2::make_initial_data(rg.solver, c.initial_data, coeffs);
  std::vector<double> observe;
  const int nsnap = 5;
  for (int i = 0; i <= nsnap; ++i) observe.push_back(c.tau0 * i / nsnap);
  kp2::Trajectory traj = kp2::solve(A0, coeffs, c.tau0, c.dtau, observe);
  json j;
  j["frame"] = c.frame;
  j["eps"] = rg.eps;
  j["tau_end"] = c.tau0;
  j["l2_initial"] = traj.diagnostics.l2_initial;
  j["l2_final"] = traj.diagnostics.l2_final;
  j["l2_rel_drift"] = traj.diagnostics.l2_max_rel_drift;
  j["zero_mode_rel"] = traj.diagnostics.max_zero_mode_rel;
  const bool eta_indep = A0.derivative(0, 1).sup_norm() <= 1e-10 * std::max(A0.sup_norm(), 1e-300);
  j["eta_independent_data"] = eta_indep;
  int idx = 0;
  for (const auto& snap : traj.snapshots) {
    char name[32];
    std::snprintf(name, sizeof name, "kp2_%03d", idx++);
    io::write_snapshot(c.output_dir + "/" + name, snap.A, snap.tau, "A");
  }
  if (eta_indep) {
    // reduced 1D reference comparison on the final snapshot
    const Grid2D& g = rg.solver;
    const auto& v0 = A0.values();
    std::vector<double> line0(v0.begin(), v0.begin() + g.nx);
    const int ref_steps = std::max(200, static_cast<int>(std::ceil(c.tau0 / (0.2 * c.dtau))));
    std::vector<double> ref = kdv1d::integrate(line0, g.Lx, coeffs, c.tau0, ref_steps);
    const auto& vf = traj.snapshots.back().A.values();
    double err = 0.0, scale = 0.0;
    for (int i = 0; i < g.nx; ++i) {
      err = std::max(err, std::abs(vf[i] - ref[i]));
      scale = std::max(scale, std::abs(ref[i]));
    }
    j["kdv_reduction_sup_error"] = err;
    j["kdv_reduction_sup_scale"] = scale;
    double eta_dev = 0.0;
    const auto detas = traj.snapshots.back().A.derivative(0, 1).sup_norm();
    eta_dev = detas / std::max(traj.snapshots.back().A.sup_norm(), 1e-300);
    j["eta_independence_preserved_rel"] = eta_dev;
  }
  write_text(c.output_dir + "/kp2.json", j.dump(2) + "\n");
  std::cout << "kp2: wrote " << c.output_dir << "/kp2.json (l2 drift "
            << traj.diagnostics.l2_max_rel_drift << ")\n";
  return 0;
}

int cmd_sample_bound(const CommonOpts& o) {
  config::RunConfig c = load(o);
  std::vector<double> eps = c.eps_list;
  if (eps.size() < 2) eps = {0.1, 0.2, 0.3};
  std::sort(eps.begin(), eps.end());
  verify::SamplingBoundReport rep = verify::sampling_bound_check(
      c.Lxi(), c.Leta_nominal(), 128, 64, c.sample_bound_modes_xi, c.sample_bound_modes_eta,
      c.sample_bound_s, eps, c.sample_bound_samples, c.seed);
  json j;
  j["s"] = c.sample_bound_s;
  j["eps"] = rep.eps;
  j["ratios"] = rep.ratios;
  j["max_ratio"] = rep.max_ratio;
  j["trend_violations"] = rep.trend_violations;
  j["trend_pairs"] = rep.trend_pairs;
  write_text(c.output_dir + "/sample_bound.json", j.dump(2) + "\n");
  std::cout << "sample-bound: max ratio " << rep.max_ratio << " over " << rep.eps.size()
            << " eps values\n";
  return 0;
}

int cmd_residuals(const CommonOpts& o) {
  config::RunConfig c = load(o);
  const kp2::Coefficients coeffs = (c.frame == "horizontal")
                                       ? kp2::Coefficients::horizontal(c.params)
                                       : kp2::Coefficients::diagonal(c.params);
  json rows = json::array();
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  for (double eps_nom : c.eps_list) {
    verify::ResolvedGrids rg =
        verify::resolve_grids(eps_nom, c.Lxi(), c.Leta_nominal(), c.solver_neta);
    SpectralField2D A0 = kp2::make_initial_data(rg.solver, c.initial_data, coeffs);
    std::vector<std::pair<std::string, double>> norms;
    if (c.frame == "horizontal") {
      auto b = ansatz::build_horizontal(A0, c.params, rg.eps);
      norms = verify::residual_norms_horizontal(b, c.params, rg.lattice);
    } else {
      auto b = ansatz::build_diagonal(A0, c.params, rg.eps);
      norms = verify::residual_norms_diagonal(b, c.params, rg.lattice);
    }
    json row;
    row["eps_nominal"] = eps_nom;
    row["eps"] = rg.eps;
    for (auto& [k, v] : norms) {
      row[k] = v;
      series[k].emplace_back(rg.eps, v);
    }
    rows.push_back(row);
  }
  json j;
  j["frame"] = c.frame;
  j["rows"] = rows;
  if (c.eps_list.size() >= 3) {
    json slopes;
    for (auto& [k, pts] : series) {
      const double thr = (k == "res_z") ? c.residual_slope_z_min : c.residual_slope_min;
      slopes[k] = slope_json(verify::fit_slope(pts), thr, true);
    }
    j["slopes"] = slopes;
  }
  write_text(c.output_dir + "/residuals.json", j.dump(2) + "\n");
  std::cout << "residuals: wrote " << c.output_dir << "/residuals.json\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"KP-II approximation laboratory for two-dimensional FPU lattices"};
  app.require_subcommand(1);
  CommonOpts opts;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "JSON run configuration")->required();
    sub->add_option("--out", opts.out_override, "output directory (overrides config)");
    sub->add_option("--threads", opts.threads_override, "worker threads (0 = auto)");
    sub->add_option("--frame", opts.frame_override, "horizontal | diagonal (overrides config)")
        ->check(CLI::IsMember({"horizontal", "diagonal"}));
  };

  CLI::App* simulate = app.add_subcommand(
      "simulate", "co-evolve the lattice and KP-II, write the error-report CSV/JSON");
  CLI::App* sweep = app.add_subcommand(
      "sweep", "run an eps sweep, fit residual and error slopes against thresholds");
  CLI::App* kp2cmd =
      app.add_subcommand("kp2", "standalone KP-II solve with conservation diagnostics");
  CLI::App* sbound = app.add_subcommand(
      "sample-bound", "discrete sampling-bound ratio table over an eps list");
  CLI::App* residuals = app.add_subcommand(
      "residuals", "lattice residual norms of the ansatz at t = 0 over an eps list");
  for (CLI::App* sub : {simulate, sweep, kp2cmd, sbound, residuals}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(opts);
    if (sweep->parsed()) return cmd_sweep(opts);
    if (kp2cmd->parsed()) return cmd_kp2(opts);
    if (sbound->parsed()) return cmd_sample_bound(opts);
    if (residuals->parsed()) return cmd_residuals(opts);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConstraintError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const BlowUpError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
