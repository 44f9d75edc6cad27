#include "dtopo/interface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dtopo/errors.hpp"
#include "dtopo/modes.hpp"
#include "dtopo/parallel.hpp"

namespace dtopo {

double Projective::value() const {
  if (den != 0.0) return num / den;
  if (num == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return num > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

double Projective::angle() const {
  constexpr double kHalfPi = 1.57079632679489661923;
  double a = std::atan2(num, den);
  if (a > kHalfPi) a -= 2 * kHalfPi;
  if (a <= -kHalfPi) a += 2 * kHalfPi;
  return a;
}

bool strictly_decreasing(const std::vector<Projective>& z) {
  constexpr double kHalfPi = 1.57079632679489661923;
  for (std::size_t i = 1; i < z.size(); ++i) {
    double d = z[i].angle() - z[i - 1].angle();
    if (d > kHalfPi) d -= 2 * kHalfPi;
    if (d <= -kHalfPi) d += 2 * kHalfPi;
    if (!(d < 0.0)) return false;
  }
  return true;
}

double DecayingPair::w() const { return a[0] * b[1] - (eps_b_first / eps_a_first) * a[1] * b[0]; }

// Z+ = u / ((1/ε)u') of the B solution at x0+.
Projective DecayingPair::z_plus() const { return {eps_b_first * b[0], b[1]}; }

// Z− = −u / ((1/ε)u') of the A solution at x0−; written so den = V21 for mirror cells.
Projective DecayingPair::z_minus() const { return {eps_a_first * a[0], -a[1]}; }

DecayingPair decaying_pair(const Structure& s, double omega, double eta_edge) {
  CellPropagator pa(s.cell_a, s.media, omega);
  CellPropagator pb(s.cell_b, s.media, omega);
  DecayingPair p;
  p.eig_a = eigen_system(pa.transfer(), eta_edge);
  p.eig_b = eigen_system(pb.transfer(), eta_edge);
  p.eps_a_first = pa.eps_first();
  p.eps_a_last = pa.eps_last();
  p.eps_b_first = pb.eps_first();
  p.b = p.eig_b.v1;
  if (is_mirror_symmetric(s.cell_a))
    p.a = {p.eig_a.v1[0], -p.eig_a.v1[1]};  // S·v1, the reflected decaying solution
  else
    p.a = p.eig_a.v2;  // grows to the right, so decays to the left
  return p;
}

ImpedancePair impedances(const Structure& s, double omega) {
  auto p = decaying_pair(s, omega);
  return {omega, p.z_minus(), p.z_plus(), p.w()};
}

namespace {

void orient(Vec2& v, const Vec2& ref) {
  if (v[0] * ref[0] + v[1] * ref[1] < 0) v = {-v[0], -v[1]};
}

void orient(DecayingPair& p, const DecayingPair& ref) {
  orient(p.a, ref.a);
  orient(p.b, ref.b);
}

struct Sample {
  double omega;
  DecayingPair pair;
  bool ok;
};

// Interior samples plus two guards 1e-6 of the width away from the edges.
std::vector<Sample> w_samples(const Structure& s, double lo, double hi, int n, double eta_edge) {
  std::vector<double> om;
  om.push_back(lo + 1e-6 * (hi - lo));
  for (int k = 0; k < n; ++k) om.push_back(lo + (hi - lo) * (k + 1.0) / (n + 1.0));
  om.push_back(hi - 1e-6 * (hi - lo));
  std::vector<Sample> out(om.size());
  parallel_for(om.size(), [&](std::size_t i) {
    out[i].omega = om[i];
    try {
      out[i].pair = decaying_pair(s, om[i], eta_edge);
      out[i].ok = true;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::InsideBand) throw;
      out[i].ok = false;  // guard sample too close to an edge
    }
  });
  std::erase_if(out, [](const Sample& x) { return !x.ok; });
  for (std::size_t i = 1; i < out.size(); ++i) orient(out[i].pair, out[i - 1].pair);
  return out;
}

int sgn(double x) { return (x > 0) - (x < 0); }

InterfaceMode refine_root(const Structure& s, const GapIntersection& gap, const Sample& left, const Sample& right,
                          const InterfaceOptions& opt) {
  auto g = [&](double w) {
    auto p = decaying_pair(s, w, opt.eta_edge);
    orient(p, left.pair);
    return p.w();
  };
  double wm;
  if (left.pair.w() == 0.0) {
    wm = left.omega;
  } else if (right.pair.w() == 0.0) {
    wm = right.omega;
  } else {
    auto [x, y] = bisect(g, left.omega, right.omega);
    wm = std::abs(g(x)) <= std::abs(g(y)) ? x : y;
  }
  const double tol = opt.eta_edge * std::max(1.0, wm);
  if (wm - gap.lower < tol || gap.upper - wm < tol)
    throw Error(ErrorKind::RootAtEdge, "interface root within eta_edge of a gap edge");
  InterfaceMode m;
  m.omega_m = wm;
  m.gap = gap;
  auto p = decaying_pair(s, wm, opt.eta_edge);
  m.residual_determinant = std::abs(p.w());
  double zp = p.z_plus().value(), zm = p.z_minus().value();
  m.residual_impedance = std::abs(zp + zm);
  m.lambda_b = p.eig_b.lambda1;
  m.lambda_a = p.eig_a.lambda1;
  m.decay_a = std::abs(m.lambda_a);
  m.decay_b = std::abs(m.lambda_b);
  m.profile = mode_profile(s, wm, opt.profile_cells, opt.samples_per_cell);
  return m;
}

}  // namespace

std::vector<ImpedancePair> impedance_samples(const Structure& s, double lo, double hi, int n) {
  std::vector<ImpedancePair> out;
  std::vector<double> om(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) om[static_cast<std::size_t>(k)] = lo + (hi - lo) * (k + 1.0) / (n + 1.0);
  std::vector<DecayingPair> pairs(om.size());
  parallel_for(om.size(), [&](std::size_t i) { pairs[i] = decaying_pair(s, om[i]); });
  for (std::size_t i = 1; i < pairs.size(); ++i) orient(pairs[i], pairs[i - 1]);
  for (std::size_t i = 0; i < pairs.size(); ++i)
    out.push_back({om[i], pairs[i].z_minus(), pairs[i].z_plus(), pairs[i].w()});
  return out;
}

std::vector<InterfaceMode> find_interface_candidates(const Structure& s, const GapIntersection& gap,
                                                     const InterfaceOptions& opt) {
  auto smp = w_samples(s, gap.lower, gap.upper, opt.n_samples, opt.eta_edge);
  std::vector<std::pair<std::size_t, std::size_t>> brackets;
  for (std::size_t i = 0; i + 1 < smp.size(); ++i) {
    int s0 = sgn(smp[i].pair.w()), s1 = sgn(smp[i + 1].pair.w());
    if (s0 == 0) {
      brackets.emplace_back(i, i);
    } else if (s1 != 0 && s0 != s1) {
      brackets.emplace_back(i, i + 1);
    }
  }
  std::vector<InterfaceMode> out;
  for (auto [i, j] : brackets) out.push_back(refine_root(s, gap, smp[i], smp[j], opt));
  return out;
}

std::vector<double> impedance_sum_roots(const Structure& s, const GapIntersection& gap, const InterfaceOptions& opt) {
  auto smp = w_samples(s, gap.lower, gap.upper, opt.n_samples, opt.eta_edge);
  auto sum = [](const DecayingPair& p) { return p.z_plus().value() + p.z_minus().value(); };
  auto den = [](const DecayingPair& p) { return p.a[1] * p.b[1]; };
  std::vector<double> roots;
  for (std::size_t i = 0; i + 1 < smp.size(); ++i) {
    const auto &l = smp[i].pair, &r = smp[i + 1].pair;
    if (sgn(sum(l)) == sgn(sum(r))) continue;
    if (sgn(den(l)) != sgn(den(r)) && sgn(l.w()) == sgn(r.w())) continue;  // through ∞
    auto g = [&](double w) { return sum(decaying_pair(s, w, opt.eta_edge)); };
    auto [x, y] = bisect(g, smp[i].omega, smp[i + 1].omega);
    roots.push_back(std::abs(g(x)) <= std::abs(g(y)) ? x : y);
  }
  return roots;
}

InterfaceResult find_interface_mode(const Structure& s, const GapIntersection& gap, const InterfaceOptions& opt) {
  if (!(gap.lower < gap.upper)) throw Error(ErrorKind::InvalidInput, "empty gap intersection");
  const bool symmetric = is_mirror_symmetric(s.cell_a) && is_mirror_symmetric(s.cell_b);
  std::optional<int> ja, jb;
  if (symmetric) {
    ja = bulk_index(s.cell_a, s.media, gap.gap_a, opt.n_grid).value;
    jb = bulk_index(s.cell_b, s.media, gap.gap_b, opt.n_grid).value;
    if (*ja + *jb != 0) return NoMode{gap, *ja + *jb, "bulk indices sum to " + std::to_string(*ja + *jb)};
  }
  auto cands = find_interface_candidates(s, gap, opt);
  if (cands.empty()) return NoMode{gap, symmetric ? std::optional<int>(0) : std::nullopt, "no sign change of W in the gap"};
  if (cands.size() > 1) {
    std::string list;
    for (const auto& c : cands) list += " " + std::to_string(c.omega_m);
    throw Error(ErrorKind::MultipleRoots, std::to_string(cands.size()) + " sign changes of W:" + list);
  }
  InterfaceMode m = cands.front();
  m.bulk_a = ja;
  m.bulk_b = jb;
  m.symmetry_protected = symmetric;
  return m;
}

namespace {

// Keeps the component of s along v (dropping the one along w); returns the dropped size relative to |s|.
double project(Vec2& s, const Vec2& v, const Vec2& w) {
  double det = v[0] * w[1] - v[1] * w[0];
  double cv = (s[0] * w[1] - s[1] * w[0]) / det;
  double cw = (v[0] * s[1] - v[1] * s[0]) / det;
  double ns = std::hypot(s[0], s[1]);
  double dropped = std::abs(cw) * std::hypot(w[0], w[1]);
  s = {cv * v[0], cv * v[1]};
  return ns > 0 ? dropped / ns : 0.0;
}

}  // namespace

ModeProfile mode_profile(const Structure& s, double omega_m, int n_cells, int samples_per_cell, bool reproject) {
  ModeProfile prof;
  auto p = decaying_pair(s, omega_m);
  CellPropagator pa(s.cell_a, s.media, omega_m);
  CellPropagator pb(s.cell_b, s.media, omega_m);
  const TransferMatrix ta_inv = pa.transfer().inverse();

  // B side, seed ∝ v1^B at x0+
  Vec2 st = p.b;
  prof.boundary.push_back({0, 0.0, st[0], st[1]});
  for (int n = 0; n < n_cells; ++n) {
    for (int j = 1; j < samples_per_cell; ++j) {
      double t = static_cast<double>(j) / samples_per_cell;
      auto v = pb.at(st, t);
      prof.interior.push_back({n, n + t, v[0], v[1]});
    }
    st = pb.transfer().apply(st);
    if (reproject) prof.drift = std::max(prof.drift, project(st, p.eig_b.v1, p.eig_b.v2));
    prof.boundary.push_back({n + 1, n + 1.0, st[0], st[1]});
  }

  // A side: same u and flux at x0, expressed in A's first-layer coordinates
  Vec2 sa = {p.b[0], p.b[1] * p.eps_a_first / p.eps_b_first};
  const Vec2& grow_left = p.eig_a.v1;
  Vec2 seed = sa;
  prof.seed_mismatch = project(seed, p.a, grow_left);
  if (reproject) sa = seed;
  std::vector<ProfilePoint> left_b, left_i;
  for (int n = 0; n < n_cells; ++n) {
    sa = ta_inv.apply(sa);
    if (reproject) prof.drift = std::max(prof.drift, project(sa, p.a, grow_left));
    const int cell = -(n + 1);
    left_b.push_back({cell, static_cast<double>(cell), sa[0], sa[1]});
    for (int j = 1; j < samples_per_cell; ++j) {
      double t = static_cast<double>(j) / samples_per_cell;
      auto v = pa.at(sa, t);
      left_i.push_back({cell, cell + t, v[0], v[1]});
    }
  }
  prof.boundary.insert(prof.boundary.begin(), left_b.rbegin(), left_b.rend());
  std::vector<ProfilePoint> interior;
  for (int n = n_cells - 1; n >= 0; --n)
    for (int j = 0; j < samples_per_cell - 1; ++j)
      interior.push_back(left_i[static_cast<std::size_t>(n * (samples_per_cell - 1) + j)]);
  interior.insert(interior.end(), prof.interior.begin(), prof.interior.end());
  prof.interior = std::move(interior);
  return prof;
}

DecayFit fit_decay(const ModeProfile& p, int from, int to) {
  auto slope = [&](int sign) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int k = 0;
    for (const auto& q : p.boundary) {
      int n = static_cast<int>(std::lround(q.x));
      if (n * sign < from || n * sign > to) continue;
      double x = std::abs(n), y = std::log(std::abs(q.u));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++k;
    }
    if (k < 2) throw Error(ErrorKind::InvalidInput, "profile too short for the decay fit");
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
  };
  return {slope(-1), slope(1)};
}

}  // namespace dtopo
