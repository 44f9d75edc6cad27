#pragma once

#include <complex>
#include <vector>

#include "dtopo/materials.hpp"

namespace dtopo {

// Flux-form finite differences for −(1/μ0)(u'/ε)' = ω²u, written as K u = μ0 ω² M u with a
// lumped nodal mass M. Periodic operators carry the Bloch twist on the wrap coupling.
struct DiscreteOperator {
  double kappa = 0.0;
  double omega = 0.0;
  double mu0 = 1.0;
  bool periodic = true;
  std::vector<double> x;     // node positions
  std::vector<double> diag;  // K_jj
  std::vector<double> off;   // K_{j,j+1}
  std::vector<double> mass;  // M_jj
  double wrap = 0.0;         // K_{n−1,0} = wrap · e^{iκ} for periodic operators

  std::size_t size() const { return diag.size(); }
  // K as a dense row-major matrix (tests and diagnostics only).
  std::vector<std::complex<double>> dense() const;
};

struct OracleOptions {
  int n_scan = 200;
  bool align_to_layers = true;  // otherwise uniform grid with harmonic-mean 1/ε per interval
};

DiscreteOperator assemble_bloch_operator(const UnitCell& cell, const Media& media, double kappa, double omega, int n,
                                         bool align_to_layers = true);

// Clamped ends at ±n_cells; A fills x < 0.
DiscreteOperator assemble_finite_operator(const Structure& s, int n_cells_per_side, double omega, int n_per_cell);

// Number of generalised eigenvalues of (K, μ0 M) below ω², from the pivot signs of K − μ0ω²M.
int count_below(const DiscreteOperator& op);

std::vector<double> oracle_band_frequencies(const UnitCell& cell, const Media& media, double kappa, double lo,
                                            double hi, int n, const OracleOptions& opt = {});

struct OracleVector {
  std::vector<double> x;
  std::vector<double> mass;
  std::vector<std::complex<double>> u;
};

// Null vector of K − μ0ω²M at a self-consistent root, by inverse iteration.
OracleVector oracle_eigenvector(const DiscreteOperator& op);

struct OracleRoot {
  double omega = 0.0;
  double score = 0.0;  // clamp(2f − 1, 0, 1), f = energy fraction within n_cells/2 of x0
};

std::vector<OracleRoot> oracle_finite_interface(const Structure& s, int n_cells_per_side, double lo, double hi,
                                                int n_per_cell, const OracleOptions& opt = {});

}  // namespace dtopo
