#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dtopo/materials.hpp"
#include "dtopo/spectrum.hpp"
#include "dtopo/xfer.hpp"

namespace dtopo {

// num/den, so ±∞ is just den = 0.
struct Projective {
  double num = 0.0, den = 1.0;
  double value() const;
  bool finite() const { return den != 0.0; }
  // Angle of (den, num) folded into (−π/2, π/2]; moves continuously through ∞.
  double angle() const;
};

// True when every step of the sequence moves the point the decreasing way round the projective line.
bool strictly_decreasing(const std::vector<Projective>& z);

struct ImpedancePair {
  double omega = 0.0;
  Projective z_minus;
  Projective z_plus;
  double w = 0.0;  // matching determinant, zero at an interface mode
};

// Decaying solutions on both sides of x0 at one frequency inside a common gap.
struct DecayingPair {
  CellEigenSystem eig_a, eig_b;
  Vec2 a{};  // leftward-decaying (u, u') of A, coordinates of A's first layer
  Vec2 b{};  // rightward-decaying (u, u') of B, coordinates of B's first layer
  double eps_a_first = 1.0, eps_a_last = 1.0, eps_b_first = 1.0;
  double w() const;  // a1 b2 − (εB/εA) a2 b1
  Projective z_plus() const;
  Projective z_minus() const;
};

DecayingPair decaying_pair(const Structure& s, double omega, double eta_edge = kEtaEdge);
ImpedancePair impedances(const Structure& s, double omega);

// Interior samples of the gap with eigenvectors oriented continuously in ω.
std::vector<ImpedancePair> impedance_samples(const Structure& s, double lo, double hi, int n);

struct ProfilePoint {
  int cell = 0;  // x lies in cell [cell, cell+1)
  double x = 0.0;
  double u = 0.0;
  double du = 0.0;
};

struct ModeProfile {
  std::vector<ProfilePoint> boundary;  // x_n, n = −N..N
  std::vector<ProfilePoint> interior;  // intra-cell samples, sorted by x
  double drift = 0.0;          // largest growing-component correction, relative
  double seed_mismatch = 0.0;  // A-side seed off the A decaying direction, relative
};

struct InterfaceMode {
  double omega_m = 0.0;
  GapIntersection gap;
  double residual_impedance = 0.0;
  double residual_determinant = 0.0;
  double lambda_a = 0.0;  // decay factor per cell towards −∞ (|.| < 1)
  double lambda_b = 0.0;
  double decay_a = 0.0;
  double decay_b = 0.0;
  std::optional<int> bulk_a, bulk_b;
  bool symmetry_protected = false;
  ModeProfile profile;
};

struct NoMode {
  GapIntersection gap;
  std::optional<int> index_sum;
  std::string reason;
};

using InterfaceResult = std::variant<InterfaceMode, NoMode>;

struct InterfaceOptions {
  int n_samples = 256;
  int profile_cells = 10;
  int samples_per_cell = 8;
  int n_grid = 1024;  // edge modes for the bulk indices
  double eta_edge = kEtaEdge;
};

InterfaceResult find_interface_mode(const Structure& s, const GapIntersection& gap, const InterfaceOptions& opt = {});

// Every sign change of W over the gap samples, refined; no uniqueness claim.
std::vector<InterfaceMode> find_interface_candidates(const Structure& s, const GapIntersection& gap,
                                                     const InterfaceOptions& opt = {});

// Zeros of Z+ + Z− in the gap, skipping sign changes that come from a pole of either impedance.
std::vector<double> impedance_sum_roots(const Structure& s, const GapIntersection& gap, const InterfaceOptions& opt = {});

// With reproject = false the cell-boundary states are plain products of cell matrices.
ModeProfile mode_profile(const Structure& s, double omega_m, int n_cells, int samples_per_cell = 8,
                         bool reproject = true);

// Least-squares slope of log|u(x_n)| against |n| over from <= |n| <= to, per side.
struct DecayFit {
  double slope_a = 0.0;  // x < 0, compare with log|λ1 of A|
  double slope_b = 0.0;
};
DecayFit fit_decay(const ModeProfile& p, int from = 3, int to = 10);

}  // namespace dtopo
