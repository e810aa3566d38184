#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "kp2fpu/run_config.hpp"
#include "kp2fpu/snapshot_io.hpp"

using namespace kp2fpu;

TEST_CASE("nice_even_size picks even 7-smooth integers near the target") {
  for (double target : {126.0, 315.9, 502.7, 670.2, 1254.3, 2246.1}) {
    const int n = nice_even_size(target);
    CHECK(n % 2 == 0);
    int m = n;
    for (int p : {2, 3, 5, 7})
      while (m % p == 0) m /= p;
    CHECK(m == 1);
    CHECK(std::abs(n - target) <= 0.07 * target + 1.0);
  }
}

TEST_CASE("config round trip: parse(serialize(parse(x))) == parse(x)") {
  const std::string text = R"({
    "schema_version": 1,
    "frame": "diagonal",
    "params": {"c1": 1.5, "c2": 1.5, "alpha1": 0.5, "alpha2": 1.0},
    "eps_list": [0.15, 0.2, 0.25],
    "box": {"Lxi_over_pi": 16.0, "Leta_over_pi": 8.0},
    "tau0": 0.125,
    "dtau": 0.001,
    "initial_data": {"preset": "perturbed-line-soliton", "kappa": 0.4, "delta": 0.1},
    "observer_stride": 25,
    "output_dir": "results",
    "seed": 99,
    "threads": 2
  })";
  config::RunConfig a = config::deserialize(text);
  config::RunConfig b = config::deserialize(config::serialize(a));
  CHECK(config::serialize(a) == config::serialize(b));
  CHECK(b.frame == "diagonal");
  CHECK(b.params.alpha1 == 0.5);
  CHECK(b.eps_list.size() == 3);
  CHECK(b.tau0 == 0.125);
  CHECK(b.initial_data.kappa == 0.4);
  CHECK(b.seed == 99);
}

TEST_CASE("config: missing required fields are named") {
  CHECK_THROWS_WITH_AS(config::deserialize(R"({"eps": 0.2,
      "initial_data": {"preset": "zero"}})"),
                       doctest::Contains("frame"), ConfigError);
  CHECK_THROWS_WITH_AS(config::deserialize(R"({"frame": "horizontal",
      "initial_data": {"preset": "zero"}})"),
                       doctest::Contains("eps"), ConfigError);
  CHECK_THROWS_WITH_AS(config::deserialize(R"({"frame": "horizontal", "eps": 0.2,
      "initial_data": {}})"),
                       doctest::Contains("initial_data.preset"), ConfigError);
  CHECK_THROWS_AS(config::deserialize("not json"), ConfigError);
  CHECK_THROWS_WITH_AS(config::deserialize(R"({"frame": "sideways", "eps": 0.2,
      "initial_data": {"preset": "zero"}})"),
                       doctest::Contains("sideways"), ConfigError);
}

TEST_CASE("config: single eps key expands to a one-element list") {
  config::RunConfig c = config::deserialize(
      R"({"frame": "horizontal", "eps": 0.2, "initial_data": {"preset": "zero"}})");
  CHECK(c.eps_list.size() == 1);
  CHECK(c.eps_list[0] == 0.2);
}

TEST_CASE("env overrides") {
  config::RunConfig c;
  setenv("KP2FPU_THREADS", "3", 1);
  setenv("KP2FPU_OUT", "elsewhere", 1);
  config::apply_env_overrides(c);
  unsetenv("KP2FPU_THREADS");
  unsetenv("KP2FPU_OUT");
  CHECK(c.threads == 3);
  CHECK(c.output_dir == "elsewhere");
}

TEST_CASE("lattice snapshot round trip") {
  namespace fs = std::filesystem;
  const std::string base = (fs::temp_directory_path() / "kp2fpu_snap_test").string();
  lattice::StateH s(LatticeGrid(8, 6));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto* f : s.fields())
    for (double& v : *f) v = u(rng);
  s.t = 1.75;
  io::write_snapshot(base, s, 0.2);
  lattice::StateH r = io::read_snapshot_h(base);
  CHECK(r.t == s.t);
  CHECK(r.grid == s.grid);
  auto fa = s.fields();
  auto fb = r.fields();
  for (int f = 0; f < 6; ++f)
    for (size_t i = 0; i < fa[f]->size(); ++i) CHECK((*fa[f])[i] == (*fb[f])[i]);
  fs::remove(base + ".f64");
  fs::remove(base + ".json");
}

TEST_CASE("field snapshot writes the sidecar with grid metadata") {
  namespace fs = std::filesystem;
  const std::string base = (fs::temp_directory_path() / "kp2fpu_field_test").string();
  Grid2D g(16, 8, 2.0, 1.0);
  io::write_snapshot(base, SpectralField2D(g), 0.5, "A");
  CHECK(fs::exists(base + ".f64"));
  CHECK(fs::file_size(base + ".f64") == sizeof(double) * g.size());
  CHECK(fs::exists(base + ".json"));
  fs::remove(base + ".f64");
  fs::remove(base + ".json");
}
