#include "dtopo/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dtopo/errors.hpp"
#include "dtopo/parallel.hpp"
#include "dtopo/xfer.hpp"

namespace dtopo {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTouch = 1e-9;       // extremum this close to ±2 counts as touching
constexpr double kRefineBand = 1.9;   // refine in-band extrema beyond this
}  // namespace

const char* to_string(EdgeSource s) {
  switch (s) {
    case EdgeSource::A: return "A";
    case EdgeSource::B: return "B";
    case EdgeSource::both: return "both";
  }
  return "both";
}

double Band::kappa_at_lower() const {
  if (clipped_lower) return std::numeric_limits<double>::quiet_NaN();
  if (omega_at_kappa0 && *omega_at_kappa0 == lower) return 0.0;
  return kPi;
}

double Band::kappa_at_upper() const {
  if (clipped_upper) return std::numeric_limits<double>::quiet_NaN();
  if (omega_at_kappa0 && *omega_at_kappa0 == upper) return 0.0;
  return kPi;
}

std::vector<std::pair<double, double>> split_window(const Media& media, double lo, double hi) {
  if (!(lo >= 0.0) || !(hi > lo)) throw Error(ErrorKind::InvalidInput, "window must satisfy 0 <= lo < hi");
  const double guard = 4.0 * media.eta_pole;
  std::vector<std::pair<double, double>> holes;
  for (const auto* m : {&media.eps1, &media.eps2}) {
    if (m->beta > 0.0)
      holes.emplace_back(std::sqrt((1.0 - guard) / m->beta), std::sqrt((1.0 + guard) / m->beta));
  }
  if (media.perturbed()) holes.emplace_back(-1.0, guard);
  std::sort(holes.begin(), holes.end());
  std::vector<std::pair<double, double>> out;
  double cur = lo;
  for (auto [h0, h1] : holes) {
    if (h1 <= cur) continue;
    if (h0 >= hi) break;
    if (h0 > cur) out.emplace_back(cur, h0);
    cur = std::max(cur, h1);
  }
  if (cur < hi) out.emplace_back(cur, hi);
  if (out.empty()) throw Error(ErrorKind::WindowAtPole, "window lies entirely within a pole exclusion zone");
  return out;
}

namespace {

struct Event {
  double omega;
  int sign;    // f = 2*sign at the edge
  bool opens;  // band starts here (increasing ω)
};

int state_of(double f) { return f > 2.0 ? 1 : (f < -2.0 ? -1 : 0); }

// Golden-section search for an extremum of s*f on [a, b]; returns (ω*, f(ω*)).
template <class F>
std::pair<double, double> golden_max(F&& f, double a, double b, double s) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = s * f(c), fd = s * f(d);
  for (int it = 0; it < 200 && (b - a) > 4e-16 * std::max(1.0, std::abs(b)); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = s * f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = s * f(d);
    }
  }
  double w = fc > fd ? c : d;
  return {w, f(w)};
}

// Edge between a and b where f crosses 2*sign; returns the in-band endpoint.
template <class F>
double refine_edge(F&& f, double a, double b, int sign) {
  auto [x, y] = bisect([&](double w) { return f(w) - 2.0 * sign; }, a, b);
  return std::abs(f(x)) <= 2.0 ? x : y;
}

}  // namespace

std::vector<Band> scan_bands(const UnitCell& cell, const Media& media, double lo, double hi, const ScanOptions& opt) {
  validate_cell(cell);
  if (opt.n_scan < 3) throw Error(ErrorKind::InvalidInput, "n_scan must be >= 3");
  auto windows = split_window(media, lo, hi);
  auto f = [&](double w) { return discriminant(cell, media, w); };

  std::vector<Band> bands;
  for (std::size_t sw = 0; sw < windows.size(); ++sw) {
    const double a = windows[sw].first, b = windows[sw].second;
    const std::size_t n = static_cast<std::size_t>(opt.n_scan);
    std::vector<double> om(n), fv(n);
    for (std::size_t i = 0; i < n; ++i) om[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    om[n - 1] = b;
    parallel_for(n, [&](std::size_t i) { fv[i] = f(om[i]); });

    std::vector<Event> ev;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      int s0 = state_of(fv[i]), s1 = state_of(fv[i + 1]);
      if (s0 == s1) continue;
      if (s0 == 0) {
        ev.push_back({refine_edge(f, om[i], om[i + 1], s1), s1, false});
      } else if (s1 == 0) {
        ev.push_back({refine_edge(f, om[i], om[i + 1], s0), s0, true});
      } else {
        // a whole band between two samples
        double e0 = refine_edge(f, om[i], om[i + 1], s0);
        double e1 = refine_edge(f, om[i], om[i + 1], s1);
        if (!(e0 < e1))
          throw Error(ErrorKind::UnpairedEdge, "unresolved band near omega=" + std::to_string(om[i]) +
                                                   "; raise n_scan");
        ev.push_back({e0, s0, true});
        ev.push_back({e1, s1, false});
      }
    }
    // extrema that hide a narrow gap (in band) or a narrow band (in gap) between samples
    for (std::size_t i = 1; i + 1 < n; ++i) {
      int s = state_of(fv[i]);
      bool is_max = fv[i] >= fv[i - 1] && fv[i] >= fv[i + 1];
      bool is_min = fv[i] <= fv[i - 1] && fv[i] <= fv[i + 1];
      if (s == 0 && (is_max || is_min)) {
        int sign = is_max ? 1 : -1;
        if (sign * fv[i] < kRefineBand) continue;
        auto [w, fw] = golden_max(f, om[i - 1], om[i + 1], sign);
        if (sign * fw > 2.0 + kTouch) {
          ev.push_back({refine_edge(f, om[i - 1], w, sign), sign, false});
          ev.push_back({refine_edge(f, w, om[i + 1], sign), sign, true});
        } else if (sign * fw >= 2.0 - kTouch) {
          ev.push_back({w, sign, false});
          ev.push_back({w, sign, true});
        }
      } else if (s != 0 && state_of(fv[i - 1]) == s && state_of(fv[i + 1]) == s) {
        // s=+1 hides a band at a minimum, s=-1 at a maximum
        bool candidate = s > 0 ? is_min : is_max;
        if (!candidate) continue;
        auto [w, fw] = golden_max(f, om[i - 1], om[i + 1], -s);
        if (s * fw < 2.0) {
          ev.push_back({refine_edge(f, om[i - 1], w, s), s, true});
          ev.push_back({refine_edge(f, w, om[i + 1], s), s, false});
        }
      }
    }
    std::stable_sort(ev.begin(), ev.end(), [](const Event& x, const Event& y) {
      if (x.omega != y.omega) return x.omega < y.omega;
      return !x.opens && y.opens;  // close before reopening at a touching point
    });

    // a "gap" whose |f| never clears 2 + kTouch is a touching point smeared by roundoff
    for (std::size_t k = 0; k + 1 < ev.size(); ++k) {
      Event& c = ev[k];
      Event& o = ev[k + 1];
      if (c.opens || !o.opens || c.sign != o.sign || !(c.omega < o.omega)) continue;
      auto [w, fw] = golden_max(f, c.omega, o.omega, c.sign);
      if (c.sign * fw - 2.0 < kTouch) c.omega = o.omega = w;
    }

    bool open = state_of(fv[0]) == 0;
    Band cur;
    int cur_sign = 0;
    auto start_band = [&](double w, bool clipped, int sign) {
      cur = Band{};
      cur.material = cell.label;
      cur.sub_window = static_cast<int>(sw);
      cur.lower = w;
      cur.clipped_lower = clipped;
      cur_sign = sign;
      if (!clipped) (sign > 0 ? cur.omega_at_kappa0 : cur.omega_at_kappa_pi) = w;
    };
    auto finish_band = [&](double w, bool clipped, int sign) {
      cur.upper = w;
      cur.clipped_upper = clipped;
      if (!clipped) (sign > 0 ? cur.omega_at_kappa0 : cur.omega_at_kappa_pi) = w;
      if (cur.complete() && sign == cur_sign)
        throw Error(ErrorKind::UnpairedEdge, "band [" + std::to_string(cur.lower) + ", " + std::to_string(w) +
                                                 "] has both edges at the same kappa; raise n_scan");
      bands.push_back(cur);
    };
    if (open) {
      bool at_edge = std::abs(std::abs(fv[0]) - 2.0) < 1e-10;
      start_band(a, !at_edge, fv[0] > 0 ? 1 : -1);
    }
    for (const auto& e : ev) {
      if (e.opens) {
        if (open) throw Error(ErrorKind::UnpairedEdge, "two band openings in a row near omega=" +
                                                           std::to_string(e.omega) + "; raise n_scan");
        start_band(e.omega, false, e.sign);
        open = true;
      } else {
        if (!open) throw Error(ErrorKind::UnpairedEdge, "band closing without opening near omega=" +
                                                            std::to_string(e.omega) + "; raise n_scan");
        finish_band(e.omega, false, e.sign);
        open = false;
      }
    }
    if (open) {
      bool at_edge = std::abs(std::abs(fv[n - 1]) - 2.0) < 1e-10;
      finish_band(b, !at_edge, fv[n - 1] > 0 ? 1 : -1);
    }
  }

  for (std::size_t i = 0; i < bands.size(); ++i) bands[i].index = static_cast<int>(i) + 1;

  // κ samples per band
  const int nk = std::max(2, opt.n_kappa);
  parallel_for(bands.size(), [&](std::size_t bi) {
    Band& bd = bands[bi];
    double flo = f(bd.lower), fhi = f(bd.upper);
    double cmin = std::min(flo, fhi), cmax = std::max(flo, fhi);
    for (int j = 0; j < nk; ++j) {
      double kappa = kPi * j / (nk - 1);
      double c = 2.0 * std::cos(kappa);
      if (j == 0 && bd.omega_at_kappa0) {
        bd.samples.emplace_back(0.0, *bd.omega_at_kappa0);
        continue;
      }
      if (j == nk - 1 && bd.omega_at_kappa_pi) {
        bd.samples.emplace_back(kPi, *bd.omega_at_kappa_pi);
        continue;
      }
      if (c <= cmin || c >= cmax) continue;  // outside a clipped band
      bd.samples.emplace_back(kappa, band_frequency(cell, media, bd, kappa));
    }
  });
  return bands;
}

double band_frequency(const UnitCell& cell, const Media& media, const Band& band, double kappa) {
  kappa = std::abs(kappa);
  if (kappa == 0.0 && band.omega_at_kappa0) return *band.omega_at_kappa0;
  if (kappa == kPi && band.omega_at_kappa_pi) return *band.omega_at_kappa_pi;
  const double c = 2.0 * std::cos(kappa);
  auto g = [&](double w) { return discriminant(cell, media, w) - c; };
  double glo = g(band.lower), ghi = g(band.upper);
  if ((glo < 0) == (ghi < 0) && glo != 0.0 && ghi != 0.0)
    throw Error(ErrorKind::NotOnBand, "kappa=" + std::to_string(kappa) + " not reached inside band " +
                                          std::to_string(band.index));
  if (glo == 0.0) return band.lower;
  if (ghi == 0.0) return band.upper;
  auto [a, b] = bisect(g, band.lower, band.upper);
  return std::abs(g(a)) <= std::abs(g(b)) ? a : b;
}

std::vector<BandGap> band_gaps(const std::vector<Band>& bands, std::vector<std::string>* warnings) {
  std::vector<BandGap> gaps;
  for (std::size_t i = 0; i + 1 < bands.size(); ++i) {
    const Band& lo = bands[i];
    const Band& hi = bands[i + 1];
    if (lo.sub_window != hi.sub_window || lo.clipped_upper || hi.clipped_lower) continue;
    double width = hi.lower - lo.upper;
    if (!(width > 1e-12 * std::max(1.0, lo.upper))) {
      if (warnings)
        warnings->push_back("Degenerate: bands " + std::to_string(lo.index) + " and " + std::to_string(hi.index) +
                            " of " + lo.material + " touch at omega=" + std::to_string(lo.upper));
      continue;
    }
    BandGap g;
    g.index = lo.index;
    g.lower = lo.upper;
    g.upper = hi.lower;
    g.material = lo.material;
    g.lower_kappa = lo.kappa_at_upper();
    g.upper_kappa = hi.kappa_at_lower();
    gaps.push_back(g);
  }
  return gaps;
}

std::vector<GapIntersection> intersect_gaps(const std::vector<BandGap>& a, const std::vector<BandGap>& b,
                                            double same_edge_tol) {
  std::vector<GapIntersection> out;
  auto same = [&](double x, double y) { return std::abs(x - y) <= same_edge_tol * std::max(1.0, std::abs(x)); };
  for (const auto& ga : a) {
    for (const auto& gb : b) {
      double lo = std::max(ga.lower, gb.lower);
      double hi = std::min(ga.upper, gb.upper);
      if (!(lo < hi)) continue;
      GapIntersection g;
      g.lower = lo;
      g.upper = hi;
      g.gap_a = ga;
      g.gap_b = gb;
      g.lower_from = same(ga.lower, gb.lower) ? EdgeSource::both : (ga.lower > gb.lower ? EdgeSource::A : EdgeSource::B);
      g.upper_from = same(ga.upper, gb.upper) ? EdgeSource::both : (ga.upper < gb.upper ? EdgeSource::A : EdgeSource::B);
      out.push_back(g);
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.lower < y.lower; });
  return out;
}

}  // namespace dtopo
