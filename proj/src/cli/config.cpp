#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dtopo/cli.hpp"
#include "dtopo/errors.hpp"

namespace dtopo::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw Error(ErrorKind::Config, path + ": " + why);
}

std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

// Rejects keys outside `allowed` so a typo never silently falls back to a default.
void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected a table");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) fail(join(path, it.key()), "unknown key");
}

double number(const json& obj, const std::string& path, const std::string& key, std::optional<double> dflt = {}) {
  if (!obj.contains(key)) {
    if (dflt) return *dflt;
    fail(join(path, key), "missing");
  }
  const json& v = obj.at(key);
  if (!v.is_number()) fail(join(path, key), "expected a number");
  return v.get<double>();
}

int integer(const json& obj, const std::string& path, const std::string& key, int dflt, int min) {
  if (!obj.contains(key)) return dflt;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(join(path, key), "expected an integer");
  int x = v.get<int>();
  if (x < min) fail(join(path, key), "must be >= " + std::to_string(min));
  return x;
}

double positive(const json& obj, const std::string& path, const std::string& key, double dflt) {
  double x = number(obj, path, key, dflt);
  if (!(x > 0.0)) fail(join(path, key), "must be > 0");
  return x;
}

PermittivityModel read_model(const json& j, const std::string& path) {
  check_keys(j, path, {"eps0", "alpha", "beta"});
  PermittivityModel m;
  m.eps0 = number(j, path, "eps0");
  m.alpha = number(j, path, "alpha", 0.0);
  m.beta = number(j, path, "beta", 0.0);
  if (m.alpha < 0.0) fail(join(path, "alpha"), "must be >= 0");
  if (m.beta < 0.0) fail(join(path, "beta"), "must be >= 0");
  return m;
}

UnitCell read_cell(const json& j, const std::string& path, const std::string& label) {
  check_keys(j, path, {"layers"});
  if (!j.contains("layers") || !j.at("layers").is_array() || j.at("layers").empty())
    fail(join(path, "layers"), "expected a non-empty list of [length, species]");
  UnitCell c;
  c.label = label;
  const json& ls = j.at("layers");
  for (std::size_t i = 0; i < ls.size(); ++i) {
    std::string p = join(path, "layers") + "[" + std::to_string(i) + "]";
    const json& l = ls[i];
    if (!l.is_array() || l.size() != 2 || !l[0].is_number() || !l[1].is_number_integer())
      fail(p, "expected [length, species]");
    Layer layer{l[0].get<double>(), l[1].get<int>()};
    if (!(layer.length > 0.0)) fail(p, "length must be > 0");
    if (layer.species != 1 && layer.species != 2) fail(p, "species must be 1 or 2");
    c.layers.push_back(layer);
  }
  try {
    validate_cell(c);
  } catch (const Error& e) {
    fail(join(path, "layers"), e.what());
  }
  return c;
}

std::vector<double> number_list(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected a list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(path + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(j[i].get<double>());
  }
  return out;
}

PerturbationKind kind(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  try {
    return perturbation_from_string(j.get<std::string>());
  } catch (const Error&) {
    fail(path, "expected none, inverse_sq_decreasing or inverse_sq_increasing");
  }
}

const json& table(const json& root, const std::string& key) {
  static const json empty = json::object();
  return root.contains(key) ? root.at(key) : empty;
}

}  // namespace

Structure RunConfig::structure() const {
  Structure s = base;
  if (pert_kind != PerturbationKind::none && pert_delta > 0.0)
    s.media = with_perturbation(s.media, pert_kind, pert_delta);
  if (sigma > 0.0) s = apply_sigma_perturbation(s, sigma);
  return s;
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Config, std::string("<root>: not valid JSON: ") + e.what());
  }
  check_keys(root, "", {"material", "cell_a", "cell_b", "globals", "perturbation", "scan", "interface", "sweep",
                        "oracle", "tolerances", "output"});
  RunConfig c;
  if (!root.contains("material")) fail("material", "missing");
  const json& mat = root.at("material");
  check_keys(mat, "material", {"eps1", "eps2"});
  if (!mat.contains("eps1")) fail("material.eps1", "missing");
  if (!mat.contains("eps2")) fail("material.eps2", "missing");
  c.base.media.eps1 = read_model(mat.at("eps1"), "material.eps1");
  c.base.media.eps2 = read_model(mat.at("eps2"), "material.eps2");
  if (!root.contains("cell_a")) fail("cell_a", "missing");
  if (!root.contains("cell_b")) fail("cell_b", "missing");
  c.base.cell_a = read_cell(root.at("cell_a"), "cell_a", "A");
  c.base.cell_b = read_cell(root.at("cell_b"), "cell_b", "B");

  const json& g = table(root, "globals");
  check_keys(g, "globals", {"mu0"});
  c.base.media.mu0 = positive(g, "globals", "mu0", 1.0);

  const json& p = table(root, "perturbation");
  check_keys(p, "perturbation", {"kind", "delta", "sigma"});
  if (p.contains("kind")) c.pert_kind = kind(p.at("kind"), "perturbation.kind");
  c.pert_delta = number(p, "perturbation", "delta", 0.0);
  if (c.pert_delta < 0.0) fail("perturbation.delta", "must be >= 0");
  c.sigma = number(p, "perturbation", "sigma", 0.0);
  if (c.sigma < 0.0) fail("perturbation.sigma", "must be >= 0");

  const json& sc = table(root, "scan");
  check_keys(sc, "scan", {"omega_min", "omega_max", "n_scan", "kappa_points", "zak_kappa_points", "grid",
                          "impedance_samples"});
  c.omega_min = number(sc, "scan", "omega_min", 0.0);
  c.omega_max = number(sc, "scan", "omega_max");
  if (c.omega_min < 0.0) fail("scan.omega_min", "must be >= 0");
  if (!(c.omega_max > c.omega_min)) fail("scan.omega_max", "must exceed omega_min");
  c.scan.n_scan = integer(sc, "scan", "n_scan", c.scan.n_scan, 16);
  c.scan.n_kappa = integer(sc, "scan", "kappa_points", c.scan.n_kappa, 2);
  c.zak_kappa_points = integer(sc, "scan", "zak_kappa_points", c.zak_kappa_points, 5);
  if (c.zak_kappa_points % 2 == 0) fail("scan.zak_kappa_points", "must be odd");
  c.grid = integer(sc, "scan", "grid", c.grid, 3);
  c.iface.n_grid = c.grid;
  c.impedance_samples = integer(sc, "scan", "impedance_samples", c.impedance_samples, 2);

  const json& it = table(root, "interface");
  check_keys(it, "interface", {"gap_index", "n_samples", "profile_cells", "samples_per_cell"});
  c.gap_index = integer(it, "interface", "gap_index", 1, 1);
  c.iface.n_samples = integer(it, "interface", "n_samples", c.iface.n_samples, 2);
  c.iface.profile_cells = integer(it, "interface", "profile_cells", c.iface.profile_cells, 1);
  c.iface.samples_per_cell = integer(it, "interface", "samples_per_cell", c.iface.samples_per_cell, 1);

  const json& sw = table(root, "sweep");
  check_keys(sw, "sweep", {"kind", "deltas", "sigmas"});
  if (sw.contains("kind")) {
    c.sweep_kind = kind(sw.at("kind"), "sweep.kind");
    if (c.sweep_kind == PerturbationKind::none) fail("sweep.kind", "a delta sweep needs a perturbation");
  }
  if (sw.contains("deltas")) c.deltas = number_list(sw.at("deltas"), "sweep.deltas");
  if (sw.contains("sigmas")) c.sigmas = number_list(sw.at("sigmas"), "sweep.sigmas");

  const json& o = table(root, "oracle");
  check_keys(o, "oracle", {"cells_per_side", "n_per_cell", "grid", "n_scan"});
  c.oracle_cells = integer(o, "oracle", "cells_per_side", c.oracle_cells, 2);
  c.oracle_n_per_cell = integer(o, "oracle", "n_per_cell", c.oracle_n_per_cell, 10);
  c.oracle_grid = integer(o, "oracle", "grid", c.oracle_grid, 500);
  c.oracle_scan = integer(o, "oracle", "n_scan", c.oracle_scan, 2);

  const json& t = table(root, "tolerances");
  check_keys(t, "tolerances",
             {"eta_pole", "eta_edge", "symmetry", "zak_stability", "unimodularity", "root", "oracle_rel"});
  c.tol.eta_pole = positive(t, "tolerances", "eta_pole", c.tol.eta_pole);
  c.tol.eta_edge = positive(t, "tolerances", "eta_edge", c.tol.eta_edge);
  c.tol.symmetry = positive(t, "tolerances", "symmetry", c.tol.symmetry);
  c.tol.zak_stability = positive(t, "tolerances", "zak_stability", c.tol.zak_stability);
  c.tol.unimodularity = positive(t, "tolerances", "unimodularity", c.tol.unimodularity);
  c.tol.root = positive(t, "tolerances", "root", c.tol.root);
  c.tol.oracle_rel = positive(t, "tolerances", "oracle_rel", c.tol.oracle_rel);
  c.base.media.eta_pole = c.tol.eta_pole;
  c.iface.eta_edge = c.tol.eta_edge;

  const json& out = table(root, "output");
  check_keys(out, "output", {"dir"});
  if (out.contains("dir")) {
    if (!out.at("dir").is_string()) fail("output.dir", "expected a string");
    c.out_dir = out.at("dir").get<std::string>();
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, path + ": " + std::string(e.what()).substr(8));  // drop the "Config: " prefix
  }
}

void apply_flags(RunConfig& cfg, const Flags& flags, const std::string& command) {
  if (!flags.out.empty()) cfg.out_dir = flags.out;
  if (flags.kappa_points) {
    if (command == "zak") {
      if (*flags.kappa_points < 5 || *flags.kappa_points % 2 == 0)
        throw Error(ErrorKind::Config, "--kappa-points: zak needs an odd count >= 5");
      cfg.zak_kappa_points = *flags.kappa_points;
    } else {
      if (*flags.kappa_points < 2) throw Error(ErrorKind::Config, "--kappa-points: must be >= 2");
      cfg.scan.n_kappa = *flags.kappa_points;
    }
  }
  if (flags.grid) {
    if (*flags.grid < 3) throw Error(ErrorKind::Config, "--grid: must be >= 3");
    cfg.grid = *flags.grid;
    cfg.iface.n_grid = *flags.grid;
  }
}

}  // namespace dtopo::cli
