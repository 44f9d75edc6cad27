#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dtopo/interface.hpp"
#include "dtopo/materials.hpp"
#include "dtopo/spectrum.hpp"

namespace dtopo::cli {

struct Tolerances {
  double eta_pole = kEtaPole;
  double eta_edge = kEtaEdge;
  double symmetry = 1e-6;
  double zak_stability = 1e-3;
  double unimodularity = 1e-10;
  double root = 1e-10;  // |W| at a reported mode, and W-root vs impedance-sum root
  double oracle_rel = 1e-3;
};

struct RunConfig {
  Structure base;  // as written, before perturbation
  PerturbationKind pert_kind = PerturbationKind::none;
  double pert_delta = 0.0;
  double sigma = 0.0;

  double omega_min = 0.0, omega_max = 1.0;
  ScanOptions scan;
  int zak_kappa_points = 201;
  int grid = 1024;
  int impedance_samples = 64;
  int gap_index = 1;
  InterfaceOptions iface;

  PerturbationKind sweep_kind = PerturbationKind::inverse_sq_decreasing;
  std::vector<double> deltas;  // empty: default grids
  std::vector<double> sigmas;

  int oracle_cells = 20;
  int oracle_n_per_cell = 200;
  int oracle_grid = 2000;
  int oracle_scan = 200;

  Tolerances tol;
  std::string out_dir = ".";

  // base with the configured δ perturbation and σ shift applied.
  Structure structure() const;
};

// Config errors are Error(ErrorKind::Config) with the offending key path in the message.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

struct Flags {
  std::string config;
  std::string out;
  bool oracle = false;
  int threads = 0;
  std::optional<int> kappa_points;
  std::optional<int> grid;
};

// Applies command-line overrides; kappa_points means the κ grid of the command being run.
void apply_flags(RunConfig& cfg, const Flags& flags, const std::string& command);

// Each returns the process exit code and writes into cfg.out_dir.
int cmd_bands(const RunConfig& cfg, std::ostream& log);
int cmd_gaps(const RunConfig& cfg, std::ostream& log);
int cmd_zak(const RunConfig& cfg, std::ostream& log);
int cmd_impedance(const RunConfig& cfg, std::ostream& log);
int cmd_interface(const RunConfig& cfg, bool oracle, std::ostream& log);
int cmd_profile(const RunConfig& cfg, std::ostream& log);
int cmd_sweep_delta(const RunConfig& cfg, std::ostream& log);
int cmd_sweep_sigma(const RunConfig& cfg, std::ostream& log);
int cmd_verify(const RunConfig& cfg, bool oracle, std::ostream& log);

// Full front end: 0 success (NoMode included), 1 computation failure, 2 config or usage error.
int run(int argc, char** argv);

// %.17g
std::string format_double(double v);

}  // namespace dtopo::cli
