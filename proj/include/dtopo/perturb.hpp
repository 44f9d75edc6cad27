#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dtopo/interface.hpp"
#include "dtopo/materials.hpp"
#include "dtopo/spectrum.hpp"

namespace dtopo {

struct SweepRecord {
  double param = 0.0;
  bool gap_found = false;
  double gap_lo = 0.0, gap_hi = 0.0;
  std::optional<double> omega_m;   // set when exactly one mode
  bool mode_found = false;
  std::vector<double> candidates;  // every W root in the tracked gap
  double residual_determinant = 0.0;
  double residual_impedance = 0.0;
  double min_deps = 0.0;     // smallest dε/dω of both species over the gap
  bool eps_monotone = true;  // min_deps >= 0
  std::string status;        // ok, GapLost, NoMode: ..., or the error text
  std::optional<InterfaceMode> mode;
};

struct SweepOptions {
  double omega_lo = 0.0, omega_hi = 1.0;
  ScanOptions scan;
  InterfaceOptions iface;
};

// Common gaps of the two cells inside the window.
std::vector<GapIntersection> common_gaps(const Structure& s, const SweepOptions& opt);

std::vector<double> default_delta_grid();                     // 33 log-spaced points in [1e-5, 1]
std::vector<double> default_sigma_grid(const Structure& s);   // 31 points in [0, σ_max]

std::vector<SweepRecord> sweep_delta(const Structure& s, int gap_index, PerturbationKind kind,
                                     const std::vector<double>& delta_grid, const SweepOptions& opt);
std::vector<SweepRecord> sweep_sigma(const Structure& s, int gap_index, const std::vector<double>& sigma_grid,
                                     const SweepOptions& opt);

struct ConvergenceReport {
  double p_small = 1e-4;
  double max_domega_rel = 0.0;
  double profile_distance = 0.0;
  int records_used = 0;
  bool converged = true;
  std::string note;
};

// Compares records with 0 < p <= p_small to the baseline (or to the p = 0 record).
ConvergenceReport converge_check(const std::vector<SweepRecord>& records, const std::optional<InterfaceMode>& baseline,
                                 double p_small = 1e-4, double tol_omega = 1e-4, double tol_profile = 1e-3);

// sup_n |u_p(x_n) − u(x_n)| over cell-boundary samples, each profile scaled to max |u| = 1 with u(x0) > 0.
double profile_distance(const ModeProfile& a, const ModeProfile& b);

}  // namespace dtopo
