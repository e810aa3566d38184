#include "kp2fpu/snapshot_io.hpp"

#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "kp2fpu/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "snapshot format is little-endian; this platform is not");

namespace kp2fpu {
namespace io {

namespace {

using nlohmann::json;

void atomic_write(const std::string& path, const std::string& data) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open '" + tmp + "' for writing");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw ConfigError("short write to '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

template <typename State>
void write_lattice(const std::string& base, const State& s, double eps, const char* frame) {
  std::string blob;
  for (const auto* f : s.fields())
    blob.append(reinterpret_cast<const char*>(f->data()), f->size() * sizeof(double));
  atomic_write(base + ".f64", blob);
  json meta;
  meta["schema_version"] = 1;
  meta["kind"] = "lattice";
  meta["frame"] = frame;
  meta["nj"] = s.grid.nj;
  meta["nk"] = s.grid.nk;
  meta["j0"] = s.grid.j0;
  meta["k0"] = s.grid.k0;
  meta["t"] = s.t;
  meta["eps"] = eps;
  meta["dtype"] = "float64-le";
  meta["order"] = "row-major-j-fastest";
  json names = json::array();
  for (const char* n : State::field_names()) names.push_back(n);
  meta["fields"] = names;
  atomic_write(base + ".json", meta.dump(2) + "\n");
}

}  // namespace

void write_snapshot(const std::string& base, const lattice::StateH& s, double eps) {
  write_lattice(base, s, eps, "horizontal");
}

void write_snapshot(const std::string& base, const lattice::StateD& s, double eps) {
  write_lattice(base, s, eps, "diagonal");
}

void write_snapshot(const std::string& base, const SpectralField2D& f, double tau,
                    const std::string& name) {
  const auto& v = f.values();
  std::string blob(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
  atomic_write(base + ".f64", blob);
  json meta;
  meta["schema_version"] = 1;
  meta["kind"] = "field";
  meta["name"] = name;
  meta["nxi"] = f.grid().nx;
  meta["neta"] = f.grid().ny;
  meta["Lxi"] = f.grid().Lx;
  meta["Leta"] = f.grid().Ly;
  meta["tau"] = tau;
  meta["dtype"] = "float64-le";
  meta["order"] = "row-major-xi-fastest";
  atomic_write(base + ".json", meta.dump(2) + "\n");
}

lattice::StateH read_snapshot_h(const std::string& base) {
  std::ifstream meta_in(base + ".json");
  if (!meta_in) throw ConfigError("cannot open '" + base + ".json'");
  json meta = json::parse(meta_in);
  if (meta.at("kind") != "lattice" || meta.at("frame") != "horizontal")
    throw ConfigError("snapshot '" + base + "' is not a horizontal lattice snapshot");
  lattice::StateH s(LatticeGrid(meta.at("nj").get<int>(), meta.at("nk").get<int>(),
                                meta.at("j0").get<int>(), meta.at("k0").get<int>()));
  s.t = meta.at("t").get<double>();
  std::ifstream in(base + ".f64", std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + base + ".f64'");
  for (auto* f : s.fields()) {
    in.read(reinterpret_cast<char*>(f->data()),
            static_cast<std::streamsize>(f->size() * sizeof(double)));
    if (!in) throw ConfigError("snapshot '" + base + "' truncated");
  }
  return s;
}

}  // namespace io
}  // namespace kp2fpu
