#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dtopo/materials.hpp"

namespace dtopo {

struct Band {
  int index = 0;        // order of appearance in the window, from 1
  std::string material;  // label of the cell
  int sub_window = 0;
  double lower = 0.0, upper = 0.0;
  bool clipped_lower = false, clipped_upper = false;
  std::optional<double> omega_at_kappa0;
  std::optional<double> omega_at_kappa_pi;
  std::vector<std::pair<double, double>> samples;  // (κ, ω), κ ascending

  bool complete() const { return !clipped_lower && !clipped_upper; }
  // κ (0 or π) at which the band touches its lower / upper edge; NaN if clipped.
  double kappa_at_lower() const;
  double kappa_at_upper() const;
};

struct BandGap {
  int index = 0;
  double lower = 0.0, upper = 0.0;
  std::string material;
  double lower_kappa = 0.0;  // κ of the edge mode at `lower` (0 or π)
  double upper_kappa = 0.0;
};

enum class EdgeSource { A, B, both };
const char* to_string(EdgeSource s);

struct GapIntersection {
  double lower = 0.0, upper = 0.0;
  BandGap gap_a, gap_b;
  EdgeSource lower_from = EdgeSource::both;
  EdgeSource upper_from = EdgeSource::both;
  double width() const { return upper - lower; }
};

struct ScanOptions {
  int n_scan = 4000;   // per sub-window
  int n_kappa = 64;
};

// Pieces of [lo, hi] that stay clear of every pole (and of ω = 0 when a 1/ω² term is active).
std::vector<std::pair<double, double>> split_window(const Media& media, double lo, double hi);

std::vector<Band> scan_bands(const UnitCell& cell, const Media& media, double lo, double hi,
                             const ScanOptions& opt = {});

// Gaps between consecutive complete edges in the same sub-window.
std::vector<BandGap> band_gaps(const std::vector<Band>& bands, std::vector<std::string>* warnings = nullptr);

std::vector<GapIntersection> intersect_gaps(const std::vector<BandGap>& a, const std::vector<BandGap>& b,
                                            double same_edge_tol = 1e-10);

// Solves f(ω) = 2cos κ inside the band by bisection (κ in [0, π]).
double band_frequency(const UnitCell& cell, const Media& media, const Band& band, double kappa);

// Bisection to machine resolution on a bracket where g(a), g(b) differ in sign.
// Returns the final bracket (a', b') with a' on a's side of the root.
template <class G>
std::pair<double, double> bisect(G&& g, double a, double b) {
  bool neg_a = g(a) < 0;
  for (int it = 0; it < 200; ++it) {
    double m = 0.5 * (a + b);
    if (m <= std::min(a, b) || m >= std::max(a, b)) break;
    if ((g(m) < 0) == neg_a)
      a = m;
    else
      b = m;
  }
  return {a, b};
}

}  // namespace dtopo
