#pragma once

#include <complex>
#include <vector>

#include "dtopo/materials.hpp"
#include "dtopo/spectrum.hpp"
#include "dtopo/xfer.hpp"

namespace dtopo {

using cplx = std::complex<double>;

struct BlochMode {
  double kappa = 0.0;
  double omega = 0.0;
  double mu0 = 1.0;
  std::vector<double> grid;  // uniform on [0, 1]
  std::vector<cplx> u;
  std::vector<cplx> du;
  double norm = 1.0;  // after normalisation
  CVec2 start{};      // (u, u') just inside the first layer at x = 0
  double floquet_residual = 0.0;
};

enum class EdgeKappa { zero, pi };

struct EdgeSymmetry {
  EdgeKappa kappa_edge = EdgeKappa::zero;
  bool symmetric = true;
  double u_at_0 = 0.0;
  double du_at_0 = 0.0;
  double reflection_residual = 0.0;  // relative to sup|u|
};

struct BulkIndex {
  int gap_index = 0;
  int value = 1;
};

struct ZakPhase {
  int band_index = 0;
  double theta = 0.0;       // in [0, 2π)
  double classified = 0.0;  // 0 or π
  double residual = 0.0;    // distance to the nearest of {0, π} mod 2π
  double theta_refined = 0.0;  // same loop on 2n-1 points
};

BlochMode bloch_mode(const UnitCell& cell, const Media& media, double kappa, double omega, int n_grid = 1024);
BlochMode edge_mode(const UnitCell& cell, const Media& media, EdgeKappa edge, double omega, int n_grid = 1024);

EdgeSymmetry classify_edge_symmetry(const BlochMode& mode, double tol = 1e-6);
BulkIndex bulk_index(const BandGap& gap, const BlochMode& lower_edge_mode);
// Builds the lower-edge mode of the gap for `cell` and classifies it.
BulkIndex bulk_index(const UnitCell& cell, const Media& media, const BandGap& gap, int n_grid = 1024);

// ∫ μ0 conj(a) b dx, trapezoidal.
cplx inner_product(const BlochMode& a, const BlochMode& b);

// Modes at κ_j = −π + 2πj/(n_kappa−1), j < n_kappa−1; the κ = π end is the κ = −π mode.
std::vector<BlochMode> zak_loop_modes(const UnitCell& cell, const Media& media, const Band& band, int n_kappa,
                                      int n_grid);
// Multiplies each mode by a random phase e^{iφ_j}; Θ must not notice.
void apply_gauge_noise(std::vector<BlochMode>& loop, unsigned long long seed);
// Θ = −Σ arg⟨u_j, u_{j+1}⟩ around the closed loop, in [0, 2π).
double wilson_loop_phase(const std::vector<BlochMode>& loop);

ZakPhase zak_phase(const UnitCell& cell, const Media& media, const Band& band, int n_kappa = 201,
                   int n_grid = 1024, double stability_tol = 1e-3);

// Distance between two angles on the circle.
double angle_distance(double a, double b);

}  // namespace dtopo
