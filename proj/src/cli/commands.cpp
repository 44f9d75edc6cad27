#include <cmath>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "dtopo/cli.hpp"
#include "dtopo/errors.hpp"
#include "dtopo/modes.hpp"
#include "dtopo/oracle.hpp"
#include "dtopo/parallel.hpp"
#include "dtopo/perturb.hpp"
#include "dtopo/xfer.hpp"
#include "output.hpp"

namespace dtopo::cli {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr unsigned long long kGaugeSeed = 20240917ULL;

struct Spectra {
  std::vector<Band> bands_a, bands_b;
  std::vector<BandGap> gaps_a, gaps_b;
  std::vector<GapIntersection> common;
  std::vector<std::string> warnings;
};

Spectra compute_spectra(const RunConfig& cfg, const Structure& s) {
  Spectra sp;
  sp.bands_a = scan_bands(s.cell_a, s.media, cfg.omega_min, cfg.omega_max, cfg.scan);
  sp.bands_b = scan_bands(s.cell_b, s.media, cfg.omega_min, cfg.omega_max, cfg.scan);
  sp.gaps_a = band_gaps(sp.bands_a, &sp.warnings);
  sp.gaps_b = band_gaps(sp.bands_b, &sp.warnings);
  sp.common = intersect_gaps(sp.gaps_a, sp.gaps_b);
  return sp;
}

ojson band_json(const Band& b) {
  ojson j;
  j["index"] = b.index;
  j["lower"] = b.lower;
  j["upper"] = b.upper;
  j["clipped_lower"] = b.clipped_lower;
  j["clipped_upper"] = b.clipped_upper;
  return j;
}

ojson gap_json(const BandGap& g) {
  ojson j;
  j["index"] = g.index;
  j["lower"] = g.lower;
  j["upper"] = g.upper;
  j["lower_kappa"] = g.lower_kappa;
  j["upper_kappa"] = g.upper_kappa;
  return j;
}

ojson common_json(const GapIntersection& g, int index) {
  ojson j;
  j["index"] = index;
  j["lower"] = g.lower;
  j["upper"] = g.upper;
  j["width"] = g.width();
  j["gap_a"] = g.gap_a.index;
  j["gap_b"] = g.gap_b.index;
  j["lower_from"] = to_string(g.lower_from);
  j["upper_from"] = to_string(g.upper_from);
  return j;
}

ojson spectra_json(const Spectra& sp) {
  ojson j;
  j["A"]["bands"] = ojson::array();
  j["B"]["bands"] = ojson::array();
  for (const auto& b : sp.bands_a) j["A"]["bands"].push_back(band_json(b));
  for (const auto& b : sp.bands_b) j["B"]["bands"].push_back(band_json(b));
  j["A"]["gaps"] = ojson::array();
  j["B"]["gaps"] = ojson::array();
  for (const auto& g : sp.gaps_a) j["A"]["gaps"].push_back(gap_json(g));
  for (const auto& g : sp.gaps_b) j["B"]["gaps"].push_back(gap_json(g));
  j["common_gaps"] = ojson::array();
  for (std::size_t i = 0; i < sp.common.size(); ++i)
    j["common_gaps"].push_back(common_json(sp.common[i], static_cast<int>(i) + 1));
  j["warnings"] = sp.warnings;
  return j;
}

void write_band_csv(const std::string& path, const std::vector<Band>& bands) {
  CsvWriter w(path, {"band", "kappa", "omega"});
  for (const auto& b : bands)
    for (auto [k, om] : b.samples) {
      w << b.index << k << om;
      w.end_row();
    }
}

void write_profile_csv(const std::string& path, const ModeProfile& p) {
  std::vector<std::pair<const ProfilePoint*, bool>> rows;
  for (const auto& q : p.boundary) rows.emplace_back(&q, true);
  for (const auto& q : p.interior) rows.emplace_back(&q, false);
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first->x < b.first->x; });
  CsvWriter w(path, {"n", "x", "u", "du", "boundary"});
  for (auto [q, bnd] : rows) {
    w << q->cell << q->x << q->u << q->du << (bnd ? 1 : 0);
    w.end_row();
  }
}

ojson mode_json(const InterfaceMode& m) {
  ojson j;
  j["omega_m"] = m.omega_m;
  j["residual_determinant"] = m.residual_determinant;
  j["residual_impedance"] = num(m.residual_impedance);
  j["lambda_a"] = m.lambda_a;
  j["lambda_b"] = m.lambda_b;
  j["decay_a"] = m.decay_a;
  j["decay_b"] = m.decay_b;
  j["bulk_a"] = m.bulk_a ? ojson(*m.bulk_a) : ojson(nullptr);
  j["bulk_b"] = m.bulk_b ? ojson(*m.bulk_b) : ojson(nullptr);
  j["symmetry_protected"] = m.symmetry_protected;
  j["profile_drift"] = m.profile.drift;
  j["seed_mismatch"] = m.profile.seed_mismatch;
  return j;
}

const GapIntersection& pick_gap(const Spectra& sp, int gap_index) {
  if (gap_index < 1 || gap_index > static_cast<int>(sp.common.size()))
    throw Error(ErrorKind::InvalidInput, "gap_index " + std::to_string(gap_index) + " but " +
                                             std::to_string(sp.common.size()) + " common gaps in the window");
  return sp.common[static_cast<std::size_t>(gap_index - 1)];
}

SweepOptions sweep_options(const RunConfig& cfg) {
  SweepOptions o;
  o.omega_lo = cfg.omega_min;
  o.omega_hi = cfg.omega_max;
  o.scan = cfg.scan;
  o.iface = cfg.iface;
  return o;
}

void write_sweep_csv(const std::string& path, const std::string& param, const std::vector<SweepRecord>& rec) {
  CsvWriter w(path, {param, "gap_lo", "gap_hi", "gap_width", "omega_m", "mode_found", "n_candidates",
                     "residual_determinant", "min_deps", "eps_monotone", "status"});
  for (const auto& r : rec) {
    w << r.param;
    if (r.gap_found)
      w << r.gap_lo << r.gap_hi << (r.gap_hi - r.gap_lo);
    else
      w << std::optional<double>() << std::optional<double>() << std::optional<double>();
    w << r.omega_m << (r.mode_found ? 1 : 0) << static_cast<int>(r.candidates.size());
    if (r.gap_found)
      w << r.residual_determinant << r.min_deps << (r.eps_monotone ? 1 : 0);
    else
      w << std::optional<double>() << std::optional<double>() << std::optional<double>();
    w << r.status;
    w.end_row();
  }
}

// Zak report for one cell; returns false if any band failed.
bool zak_for_cell(const RunConfig& cfg, const UnitCell& cell, const Media& media, const std::vector<Band>& bands,
                  const std::vector<BandGap>& gaps, ojson& out) {
  bool ok = true;
  const bool mirror = is_mirror_symmetric(cell);
  out["mirror_symmetric"] = mirror;
  out["warnings"] = ojson::array();
  if (!mirror)
    out["warnings"].push_back("cell " + cell.label +
                              " is not mirror-symmetric: Zak phase is not quantized and is left unclassified");
  out["bands"] = ojson::array();
  for (const auto& b : bands) {
    ojson jb = band_json(b);
    if (!b.complete()) {
      jb["zak"] = nullptr;
      jb["note"] = "band clipped by the window";
      out["bands"].push_back(jb);
      continue;
    }
    try {
      auto z = zak_phase(cell, media, b, cfg.zak_kappa_points, cfg.grid, cfg.tol.zak_stability);
      auto loop = zak_loop_modes(cell, media, b, cfg.zak_kappa_points, cfg.grid);
      apply_gauge_noise(loop, kGaugeSeed + static_cast<unsigned long long>(b.index));
      double noisy = wilson_loop_phase(loop);
      ojson jz;
      jz["theta"] = z.theta;
      jz["theta_refined"] = z.theta_refined;
      jz["theta_gauge_noise"] = noisy;
      jz["kappa_points"] = cfg.zak_kappa_points;
      if (mirror) {
        jz["classified"] = z.classified;
        jz["residual"] = z.residual;
      } else {
        jz["classified"] = nullptr;
        jz["residual"] = nullptr;
      }
      jb["zak"] = jz;
      if (mirror) {
        ojson edges = ojson::array();
        for (auto [edge, om] : {std::pair{EdgeKappa::zero, b.omega_at_kappa0}, {EdgeKappa::pi, b.omega_at_kappa_pi}}) {
          auto m = edge_mode(cell, media, edge, *om, cfg.grid);
          auto sy = classify_edge_symmetry(m, cfg.tol.symmetry);
          ojson je;
          je["kappa"] = edge == EdgeKappa::zero ? 0.0 : kPi;
          je["omega"] = *om;
          je["symmetric"] = sy.symmetric;
          je["u_at_0"] = sy.u_at_0;
          je["du_at_0"] = sy.du_at_0;
          je["reflection_residual"] = sy.reflection_residual;
          edges.push_back(je);
        }
        jb["edges"] = edges;
      }
    } catch (const Error& e) {
      jb["zak"] = nullptr;
      jb["error"] = e.what();
      ok = false;
    }
    out["bands"].push_back(jb);
  }
  out["gaps"] = ojson::array();
  for (const auto& g : gaps) {
    ojson jg = gap_json(g);
    if (mirror) {
      try {
        jg["bulk_index"] = bulk_index(cell, media, g, cfg.grid).value;
      } catch (const Error& e) {
        jg["bulk_index"] = nullptr;
        jg["error"] = e.what();
        ok = false;
      }
    } else {
      jg["bulk_index"] = nullptr;
    }
    out["gaps"].push_back(jg);
  }
  return ok;
}

struct Check {
  std::string name;
  bool pass = true;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

ojson check_json(const Check& c) {
  ojson j;
  j["name"] = c.name;
  j["pass"] = c.pass;
  j["value"] = num(c.value);
  j["tolerance"] = c.tolerance;
  if (!c.detail.empty()) j["detail"] = c.detail;
  return j;
}

// Runs f and turns an exception into a failed check.
template <class F>
Check guarded(const std::string& name, double tol, F&& f) {
  Check c;
  c.name = name;
  c.tolerance = tol;
  try {
    f(c);
  } catch (const std::exception& e) {
    c.pass = false;
    c.value = std::nan("");
    c.detail = e.what();
  }
  return c;
}

}  // namespace

int cmd_bands(const RunConfig& cfg, std::ostream& log) {
  const Structure s = cfg.structure();
  auto sp = compute_spectra(cfg, s);
  write_band_csv(output_path(cfg.out_dir, "bands_A.csv"), sp.bands_a);
  write_band_csv(output_path(cfg.out_dir, "bands_B.csv"), sp.bands_b);
  write_json(output_path(cfg.out_dir, "gaps.json"), spectra_json(sp));
  log << "bands: A " << sp.bands_a.size() << ", B " << sp.bands_b.size() << "; common gaps " << sp.common.size()
      << "\n";
  for (const auto& w : sp.warnings) log << "warning: " << w << "\n";
  return 0;
}

int cmd_gaps(const RunConfig& cfg, std::ostream& log) {
  auto sp = compute_spectra(cfg, cfg.structure());
  write_json(output_path(cfg.out_dir, "gaps.json"), spectra_json(sp));
  for (std::size_t i = 0; i < sp.common.size(); ++i)
    log << "common gap " << i + 1 << ": [" << format_double(sp.common[i].lower) << ", "
        << format_double(sp.common[i].upper) << "]\n";
  for (const auto& w : sp.warnings) log << "warning: " << w << "\n";
  return 0;
}

int cmd_zak(const RunConfig& cfg, std::ostream& log) {
  const Structure s = cfg.structure();
  auto sp = compute_spectra(cfg, s);
  ojson j;
  bool ok = zak_for_cell(cfg, s.cell_a, s.media, sp.bands_a, sp.gaps_a, j["A"]);
  ok = zak_for_cell(cfg, s.cell_b, s.media, sp.bands_b, sp.gaps_b, j["B"]) && ok;
  write_json(output_path(cfg.out_dir, "zak.json"), j);
  for (const char* c : {"A", "B"})
    for (const auto& w : j[c]["warnings"]) log << "warning: " << w.get<std::string>() << "\n";
  return ok ? 0 : 1;
}

int cmd_impedance(const RunConfig& cfg, std::ostream& log) {
  const Structure s = cfg.structure();
  auto sp = compute_spectra(cfg, s);
  CsvWriter w(output_path(cfg.out_dir, "impedance.csv"),
              {"gap", "omega", "z_minus", "z_plus", "z_minus_num", "z_minus_den", "z_plus_num", "z_plus_den", "w"});
  for (std::size_t i = 0; i < sp.common.size(); ++i) {
    const auto& g = sp.common[i];
    for (const auto& p : impedance_samples(s, g.lower, g.upper, cfg.impedance_samples)) {
      w << static_cast<int>(i + 1) << p.omega << p.z_minus.value() << p.z_plus.value() << p.z_minus.num
        << p.z_minus.den << p.z_plus.num << p.z_plus.den << p.w;
      w.end_row();
    }
  }
  log << "impedance: " << sp.common.size() << " common gaps sampled\n";
  return 0;
}

int cmd_interface(const RunConfig& cfg, bool oracle, std::ostream& log) {
  const Structure s = cfg.structure();
  auto sp = compute_spectra(cfg, s);
  ojson j;
  j["common_gaps"] = static_cast<int>(sp.common.size());
  j["results"] = ojson::array();
  bool ok = true;
  for (std::size_t i = 0; i < sp.common.size(); ++i) {
    const auto& g = sp.common[i];
    ojson r = common_json(g, static_cast<int>(i) + 1);
    try {
      auto res = find_interface_mode(s, g, cfg.iface);
      if (auto* m = std::get_if<InterfaceMode>(&res)) {
        r["status"] = "mode";
        r["mode"] = mode_json(*m);
        std::string name = "profile_gap" + std::to_string(i + 1) + ".csv";
        write_profile_csv(output_path(cfg.out_dir, name), m->profile);
        r["profile_csv"] = name;
        log << "gap " << i + 1 << ": interface mode at " << format_double(m->omega_m) << "\n";
        if (oracle) {
          OracleOptions oo;
          oo.n_scan = cfg.oracle_scan;
          auto roots = oracle_finite_interface(s, cfg.oracle_cells, g.lower, g.upper, cfg.oracle_n_per_cell, oo);
          ojson jo;
          jo["cells_per_side"] = cfg.oracle_cells;
          jo["n_per_cell"] = cfg.oracle_n_per_cell;
          jo["roots"] = ojson::array();
          const OracleRoot* best = nullptr;
          for (const auto& rt : roots) {
            jo["roots"].push_back(ojson{{"omega", rt.omega}, {"score", rt.score}});
            if (rt.score > 0.5 && (!best || std::abs(rt.omega - m->omega_m) < std::abs(best->omega - m->omega_m)))
              best = &rt;
          }
          if (best) {
            double rel = std::abs(best->omega - m->omega_m) / m->omega_m;
            jo["omega"] = best->omega;
            jo["score"] = best->score;
            jo["relative_difference"] = rel;
            jo["agrees"] = rel < cfg.tol.oracle_rel;
            if (rel >= cfg.tol.oracle_rel) ok = false;
          } else {
            jo["omega"] = nullptr;
            jo["agrees"] = false;
            ok = false;
          }
          r["oracle"] = jo;
        }
      } else {
        const auto& nm = std::get<NoMode>(res);
        r["status"] = "no_mode";
        r["reason"] = nm.reason;
        r["index_sum"] = nm.index_sum ? ojson(*nm.index_sum) : ojson(nullptr);
        log << "gap " << i + 1 << ": no interface mode (" << nm.reason << ")\n";
      }
    } catch (const Error& e) {
      r["status"] = "error";
      r["error"] = e.what();
      log << "gap " << i + 1 << ": " << e.what() << "\n";
      ok = false;
    }
    j["results"].push_back(r);
  }
  write_json(output_path(cfg.out_dir, "interface.json"), j);
  return ok ? 0 : 1;
}

int cmd_profile(const RunConfig& cfg, std::ostream& log) {
  const Structure s = cfg.structure();
  auto sp = compute_spectra(cfg, s);
  const auto& g = pick_gap(sp, cfg.gap_index);
  auto res = find_interface_mode(s, g, cfg.iface);
  if (auto* nm = std::get_if<NoMode>(&res)) {
    log << "no interface mode in gap " << cfg.gap_index << " (" << nm->reason << "); no profile written\n";
    return 0;
  }
  const auto& m = std::get<InterfaceMode>(res);
  write_profile_csv(output_path(cfg.out_dir, "profile.csv"), m.profile);
  log << "profile of the mode at " << format_double(m.omega_m) << " over " << cfg.iface.profile_cells
      << " cells per side\n";
  return 0;
}

int cmd_sweep_delta(const RunConfig& cfg, std::ostream& log) {
  std::vector<double> grid = cfg.deltas;
  if (grid.empty()) {
    grid = {0.0};
    for (double d : default_delta_grid()) grid.push_back(d);
  }
  auto rec = sweep_delta(cfg.base, cfg.gap_index, cfg.sweep_kind, grid, sweep_options(cfg));
  write_sweep_csv(output_path(cfg.out_dir, "sweep_delta.csv"), "delta", rec);
  for (const auto& r : rec)
    if (r.gap_found && !r.eps_monotone)
      log << "warning: delta=" << format_double(r.param) << " breaks d(eps)/d(omega) >= 0 in the gap (min "
          << format_double(r.min_deps) << ")\n";
  log << "sweep-delta: " << rec.size() << " points\n";
  return 0;
}

int cmd_sweep_sigma(const RunConfig& cfg, std::ostream& log) {
  std::vector<double> grid = cfg.sigmas.empty() ? default_sigma_grid(cfg.base) : cfg.sigmas;
  auto rec = sweep_sigma(cfg.base, cfg.gap_index, grid, sweep_options(cfg));
  write_sweep_csv(output_path(cfg.out_dir, "sweep_sigma.csv"), "sigma", rec);
  log << "sweep-sigma: " << rec.size() << " points\n";
  return 0;
}

int cmd_verify(const RunConfig& cfg, bool oracle, std::ostream& log) {
  const Structure s = cfg.structure();
  auto sp = compute_spectra(cfg, s);
  std::vector<Check> checks;
  const auto& T = cfg.tol;

  checks.push_back(guarded("unimodularity", T.unimodularity, [&](Check& c) {
    std::mt19937_64 rng(kGaugeSeed);
    std::uniform_real_distribution<double> uw(cfg.omega_min, cfg.omega_max);
    double worst = 0.0;
    int n = 0;
    while (n < 512) {
      double w = uw(rng);
      try {
        for (const UnitCell* cell : {&s.cell_a, &s.cell_b}) {
          worst = std::max(worst, std::abs(cell_transfer_matrix(*cell, s.media, w).det() - 1.0));
          for (const auto& l : cell->layers)
            worst = std::max(worst, std::abs(segment_matrix(l.length, s.media.eps(l.species, w), w, s.media.mu0).det() - 1.0));
        }
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::PoleProximity) throw;
        continue;
      }
      ++n;
    }
    c.value = worst;
    c.pass = worst <= c.tolerance;
  }));

  checks.push_back(guarded("band_edges", 1e-7, [&](Check& c) {
    double worst = 0.0;
    for (const auto* bands : {&sp.bands_a, &sp.bands_b})
      for (const auto& b : *bands) {
        const UnitCell& cell = bands == &sp.bands_a ? s.cell_a : s.cell_b;
        if (!b.clipped_lower) worst = std::max(worst, std::abs(std::abs(discriminant(cell, s.media, b.lower)) - 2.0));
        if (!b.clipped_upper) worst = std::max(worst, std::abs(std::abs(discriminant(cell, s.media, b.upper)) - 2.0));
      }
    c.value = worst;
    c.pass = worst <= c.tolerance;
  }));

  checks.push_back(guarded("band_monotone", 0.0, [&](Check& c) {
    int bad = 0;
    for (const auto* bands : {&sp.bands_a, &sp.bands_b})
      for (const auto& b : *bands) {
        if (b.samples.size() < 3) continue;
        double dir = b.samples.back().second - b.samples.front().second;
        for (std::size_t i = 1; i < b.samples.size(); ++i)
          if (!((b.samples[i].second - b.samples[i - 1].second) * dir > 0)) ++bad;
      }
    c.value = bad;
    c.pass = bad == 0;
  }));

  checks.push_back(guarded("edge_dichotomy", T.symmetry, [&](Check& c) {
    double worst = 0.0;
    int classified = 0;
    for (int side = 0; side < 2; ++side) {
      const UnitCell& cell = side == 0 ? s.cell_a : s.cell_b;
      if (!is_mirror_symmetric(cell)) continue;
      for (const auto& b : side == 0 ? sp.bands_a : sp.bands_b) {
        if (!b.complete()) continue;
        for (auto [edge, om] : {std::pair{EdgeKappa::zero, b.omega_at_kappa0}, {EdgeKappa::pi, b.omega_at_kappa_pi}}) {
          if (!om) continue;
          auto sy = classify_edge_symmetry(edge_mode(cell, s.media, edge, *om, cfg.grid), c.tolerance);
          worst = std::max(worst, sy.reflection_residual);
          ++classified;
        }
      }
    }
    c.value = worst;
    c.pass = worst <= c.tolerance;
    c.detail = std::to_string(classified) + " edge modes classified";
  }));

  checks.push_back(guarded("impedance_monotone", 0.0, [&](Check& c) {
    int bad = 0;
    for (const auto& g : sp.common) {
      auto smp = impedance_samples(s, g.lower, g.upper, 64);
      std::vector<Projective> zp, zm;
      for (const auto& p : smp) {
        zp.push_back(p.z_plus);
        zm.push_back(p.z_minus);
      }
      bad += !strictly_decreasing(zp);
      bad += !strictly_decreasing(zm);
    }
    c.value = bad;
    c.pass = bad == 0;
    c.detail = std::to_string(sp.common.size()) + " common gaps";
  }));

  std::vector<std::optional<InterfaceMode>> modes(sp.common.size());
  checks.push_back(guarded("interface_roots", T.root, [&](Check& c) {
    double worst = 0.0;
    std::string detail;
    for (std::size_t i = 0; i < sp.common.size(); ++i) {
      auto res = find_interface_mode(s, sp.common[i], cfg.iface);
      if (auto* m = std::get_if<InterfaceMode>(&res)) {
        modes[i] = *m;
        worst = std::max(worst, m->residual_determinant);
        auto sums = impedance_sum_roots(s, sp.common[i], cfg.iface);
        if (sums.size() != 1) {
          c.pass = false;
          detail += "gap " + std::to_string(i + 1) + ": " + std::to_string(sums.size()) + " impedance-sum roots; ";
        } else {
          worst = std::max(worst, std::abs(sums[0] - m->omega_m));
        }
        detail += "gap " + std::to_string(i + 1) + ": mode; ";
      } else {
        detail += "gap " + std::to_string(i + 1) + ": " + std::get<NoMode>(res).reason + "; ";
      }
    }
    c.value = worst;
    c.pass = c.pass && worst <= c.tolerance;
    c.detail = detail;
  }));

  checks.push_back(guarded("decay_fit", 1e-2, [&](Check& c) {
    double worst = 0.0;
    for (const auto& m : modes) {
      if (!m) continue;
      auto prof = mode_profile(s, m->omega_m, std::max(10, cfg.iface.profile_cells), 2, false);
      auto fit = fit_decay(prof, 3, 10);
      worst = std::max(worst, std::abs(fit.slope_a / std::log(m->decay_a) - 1.0));
      worst = std::max(worst, std::abs(fit.slope_b / std::log(m->decay_b) - 1.0));
    }
    c.value = worst;
    c.pass = worst <= c.tolerance;
  }));

  checks.push_back(guarded("zak_quantization", 1e-2 * kPi, [&](Check& c) {
    double worst = 0.0, gauge = 0.0;
    for (int side = 0; side < 2; ++side) {
      const UnitCell& cell = side == 0 ? s.cell_a : s.cell_b;
      if (!is_mirror_symmetric(cell)) continue;
      for (const auto& b : side == 0 ? sp.bands_a : sp.bands_b) {
        if (!b.complete()) continue;
        auto z = zak_phase(cell, s.media, b, cfg.zak_kappa_points, cfg.grid, T.zak_stability);
        auto loop = zak_loop_modes(cell, s.media, b, cfg.zak_kappa_points, cfg.grid);
        apply_gauge_noise(loop, kGaugeSeed);
        gauge = std::max(gauge, angle_distance(wilson_loop_phase(loop), z.theta));
        worst = std::max(worst, z.residual);
        break;  // first complete band
      }
    }
    c.value = worst;
    c.pass = worst <= c.tolerance && gauge <= 1e-10;
    c.detail = "gauge-noise shift " + format_double(gauge);
  }));

  if (oracle) {
    checks.push_back(guarded("oracle_interface", T.oracle_rel, [&](Check& c) {
      double worst = 0.0;
      OracleOptions oo;
      oo.n_scan = cfg.oracle_scan;
      for (std::size_t i = 0; i < sp.common.size(); ++i) {
        if (!modes[i]) continue;
        auto roots = oracle_finite_interface(s, cfg.oracle_cells, sp.common[i].lower, sp.common[i].upper,
                                             cfg.oracle_n_per_cell, oo);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& r : roots)
          if (r.score > 0.5) best = std::min(best, std::abs(r.omega - modes[i]->omega_m) / modes[i]->omega_m);
        worst = std::max(worst, best);
      }
      c.value = worst;
      c.pass = worst <= c.tolerance;
    }));
  }

  ojson j;
  j["checks"] = ojson::array();
  bool all = true;
  for (const auto& c : checks) {
    j["checks"].push_back(check_json(c));
    all = all && c.pass;
    log << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << format_double(c.value) << "\n";
  }
  j["all_pass"] = all;
  write_json(output_path(cfg.out_dir, "verify.json"), j);
  return all ? 0 : 1;
}

int run(int argc, char** argv) {
  CLI::App app{"Band gaps, Zak phases and interface modes of dispersive 1D layered media"};
  app.require_subcommand(1);
  Flags flags;
  app.add_option("--config", flags.config, "JSON config file")->required();
  app.add_option("--out", flags.out, "output directory (overrides output.dir)");
  app.add_flag("--oracle", flags.oracle, "cross-check interface modes with the finite-difference oracle");
  app.add_option("--threads", flags.threads, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  app.add_option_function<int>("--kappa-points", [&](const int& v) { flags.kappa_points = v; },
                               "kappa grid size of the command");
  app.add_option_function<int>("--grid", [&](const int& v) { flags.grid = v; }, "spatial samples per cell for modes");
  app.fallthrough();
  const std::pair<const char*, const char*> subs[] = {
      {"bands", "band edges and dispersion samples of both cells"},
      {"gaps", "band gaps and their common intersections"},
      {"zak", "Zak phases, edge symmetries and bulk indices"},
      {"impedance", "surface impedances sampled across each common gap"},
      {"interface", "interface mode in every common gap"},
      {"profile", "field profile of the mode in interface.gap_index"},
      {"sweep-delta", "track the mode under the 1/omega^2 perturbation"},
      {"sweep-sigma", "track the mode under the layer shift"},
      {"verify", "self-consistency checks on the config"},
  };
  for (auto [name, desc] : subs) app.add_subcommand(name, desc);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  RunConfig cfg;
  try {
    cfg = load_config(flags.config);
    apply_flags(cfg, flags, cmd);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  set_thread_count(flags.threads);

  try {
    if (cmd == "bands") return cmd_bands(cfg, std::cout);
    if (cmd == "gaps") return cmd_gaps(cfg, std::cout);
    if (cmd == "zak") return cmd_zak(cfg, std::cout);
    if (cmd == "impedance") return cmd_impedance(cfg, std::cout);
    if (cmd == "interface") return cmd_interface(cfg, flags.oracle, std::cout);
    if (cmd == "profile") return cmd_profile(cfg, std::cout);
    if (cmd == "sweep-delta") return cmd_sweep_delta(cfg, std::cout);
    if (cmd == "sweep-sigma") return cmd_sweep_sigma(cfg, std::cout);
    return cmd_verify(cfg, flags.oracle, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace dtopo::cli
