#include "dtopo/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dtopo/errors.hpp"
#include "dtopo/parallel.hpp"

namespace dtopo {

std::vector<GapIntersection> common_gaps(const Structure& s, const SweepOptions& opt) {
  auto ga = band_gaps(scan_bands(s.cell_a, s.media, opt.omega_lo, opt.omega_hi, opt.scan));
  auto gb = band_gaps(scan_bands(s.cell_b, s.media, opt.omega_lo, opt.omega_hi, opt.scan));
  return intersect_gaps(ga, gb);
}

std::vector<double> default_delta_grid() {
  std::vector<double> g(33);
  for (int i = 0; i < 33; ++i) g[static_cast<std::size_t>(i)] = std::pow(10.0, -5.0 + 5.0 * i / 32.0);
  g.back() = 1.0;
  return g;
}

std::vector<double> default_sigma_grid(const Structure& s) {
  double smax = sigma_upper_bound(s);
  std::vector<double> g(31);
  for (int i = 0; i < 31; ++i) g[static_cast<std::size_t>(i)] = smax * i / 30.0;
  g.back() = smax;
  return g;
}

namespace {

struct PointGaps {
  Structure s;
  std::vector<GapIntersection> gaps;
  std::string error;
};

double min_eps_slope(const Media& m, double lo, double hi) {
  double mn = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 64; ++k) {
    double w = lo + (hi - lo) * (k + 0.5) / 64.0;
    mn = std::min({mn, permittivity_derivative(m.eps1, w), permittivity_derivative(m.eps2, w)});
  }
  return mn;
}

// Tracks the reference gap by overlap, then solves each tracked point.
std::vector<SweepRecord> run_sweep(const GapIntersection& reference, const std::vector<double>& grid,
                                   std::vector<PointGaps>& pts, bool symmetric_search, const SweepOptions& opt) {
  std::vector<SweepRecord> rec(grid.size());
  std::vector<std::optional<GapIntersection>> tracked(grid.size());
  double ref_lo = reference.lower, ref_hi = reference.upper;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    rec[i].param = grid[i];
    if (!pts[i].error.empty()) {
      rec[i].status = pts[i].error;
      continue;
    }
    double best = 0.0;
    for (const auto& g : pts[i].gaps) {
      double ov = std::min(g.upper, ref_hi) - std::max(g.lower, ref_lo);
      if (ov > best) {
        best = ov;
        tracked[i] = g;
      }
    }
    if (!tracked[i]) {
      // keep the last interval: a gap that closes and reopens is picked up again
      rec[i].status = "GapLost";
      continue;
    }
    ref_lo = tracked[i]->lower;
    ref_hi = tracked[i]->upper;
  }

  parallel_for(grid.size(), [&](std::size_t i) {
    if (!tracked[i]) return;
    SweepRecord& r = rec[i];
    const GapIntersection& g = *tracked[i];
    r.gap_found = true;
    r.gap_lo = g.lower;
    r.gap_hi = g.upper;
    try {
      r.min_deps = min_eps_slope(pts[i].s.media, g.lower, g.upper);
      r.eps_monotone = r.min_deps >= 0.0;
      std::vector<InterfaceMode> modes;
      if (symmetric_search) {
        auto res = find_interface_mode(pts[i].s, g, opt.iface);
        if (auto* m = std::get_if<InterfaceMode>(&res))
          modes.push_back(*m);
        else
          r.status = "NoMode: " + std::get<NoMode>(res).reason;
      } else {
        modes = find_interface_candidates(pts[i].s, g, opt.iface);
        if (modes.empty()) r.status = "NoMode: no sign change of W in the gap";
      }
      for (const auto& m : modes) r.candidates.push_back(m.omega_m);
      r.mode_found = !modes.empty();
      if (modes.size() == 1) {
        r.omega_m = modes[0].omega_m;
        r.residual_determinant = modes[0].residual_determinant;
        r.residual_impedance = modes[0].residual_impedance;
        r.mode = modes[0];
        r.status = "ok";
      } else if (modes.size() > 1) {
        double worst = 0.0;
        for (const auto& m : modes) worst = std::max(worst, m.residual_determinant);
        r.residual_determinant = worst;
        r.status = "candidates: " + std::to_string(modes.size());
      }
    } catch (const Error& e) {
      r.mode_found = false;
      r.status = e.what();
    }
  });
  return rec;
}

GapIntersection reference_gap(const Structure& s, int gap_index, const SweepOptions& opt) {
  auto base = common_gaps(s, opt);
  if (gap_index < 1 || gap_index > static_cast<int>(base.size()))
    throw Error(ErrorKind::InvalidInput, "gap_index " + std::to_string(gap_index) + " but only " +
                                             std::to_string(base.size()) + " common gaps in the window");
  return base[static_cast<std::size_t>(gap_index - 1)];
}

}  // namespace

std::vector<SweepRecord> sweep_delta(const Structure& s, int gap_index, PerturbationKind kind,
                                     const std::vector<double>& delta_grid, const SweepOptions& opt) {
  if (kind == PerturbationKind::none) throw Error(ErrorKind::InvalidInput, "delta sweep needs a perturbation kind");
  for (std::size_t i = 0; i < delta_grid.size(); ++i)
    if (delta_grid[i] < 0.0 || (i > 0 && delta_grid[i] < delta_grid[i - 1]))
      throw Error(ErrorKind::InvalidInput, "delta grid must be ascending and >= 0");
  const GapIntersection ref = reference_gap(s, gap_index, opt);
  std::vector<PointGaps> pts(delta_grid.size());
  for (std::size_t i = 0; i < delta_grid.size(); ++i) {
    pts[i].s = s;
    // δ = 0 is the unperturbed structure itself
    if (delta_grid[i] > 0.0) pts[i].s.media = with_perturbation(s.media, kind, delta_grid[i]);
    try {
      pts[i].gaps = common_gaps(pts[i].s, opt);
    } catch (const Error& e) {
      pts[i].error = e.what();
    }
  }
  return run_sweep(ref, delta_grid, pts, true, opt);
}

std::vector<SweepRecord> sweep_sigma(const Structure& s, int gap_index, const std::vector<double>& sigma_grid,
                                     const SweepOptions& opt) {
  const GapIntersection ref = reference_gap(s, gap_index, opt);
  std::vector<PointGaps> pts(sigma_grid.size());
  for (std::size_t i = 0; i < sigma_grid.size(); ++i) {
    try {
      pts[i].s = apply_sigma_perturbation(s, sigma_grid[i]);
      pts[i].gaps = common_gaps(pts[i].s, opt);
    } catch (const Error& e) {
      pts[i].error = e.what();
    }
  }
  return run_sweep(ref, sigma_grid, pts, false, opt);
}

double profile_distance(const ModeProfile& a, const ModeProfile& b) {
  if (a.boundary.size() != b.boundary.size())
    throw Error(ErrorKind::InvalidInput, "profiles sampled over different cell ranges");
  auto scaled = [](const ModeProfile& p) {
    double mx = 0.0, u0 = 0.0;
    for (const auto& q : p.boundary) {
      mx = std::max(mx, std::abs(q.u));
      if (q.cell == 0 && q.x == 0.0) u0 = q.u;
    }
    double s = (u0 < 0 ? -1.0 : 1.0) / mx;
    std::vector<double> v;
    for (const auto& q : p.boundary) v.push_back(q.u * s);
    return v;
  };
  auto va = scaled(a), vb = scaled(b);
  double d = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) d = std::max(d, std::abs(va[i] - vb[i]));
  return d;
}

ConvergenceReport converge_check(const std::vector<SweepRecord>& records, const std::optional<InterfaceMode>& baseline,
                                 double p_small, double tol_omega, double tol_profile) {
  ConvergenceReport rep;
  rep.p_small = p_small;
  std::optional<InterfaceMode> base = baseline;
  if (!base) {
    for (const auto& r : records)
      if (r.param == 0.0 && r.mode) base = r.mode;
  }
  if (!base) throw Error(ErrorKind::MissingBaseline, "no baseline mode and no p = 0 record with a mode");
  for (const auto& r : records) {
    if (!(r.param > 0.0) || r.param > p_small * (1.0 + 1e-12)) continue;
    ++rep.records_used;
    if (!r.mode) {
      rep.converged = false;
      rep.note = "no single interface mode at p=" + std::to_string(r.param);
      continue;
    }
    rep.max_domega_rel = std::max(rep.max_domega_rel, std::abs(r.mode->omega_m - base->omega_m) / base->omega_m);
    rep.profile_distance = std::max(rep.profile_distance, profile_distance(r.mode->profile, base->profile));
  }
  if (rep.max_domega_rel >= tol_omega || rep.profile_distance >= tol_profile) rep.converged = false;
  return rep;
}

}  // namespace dtopo
