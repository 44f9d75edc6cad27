#include "dtopo/modes.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dtopo/errors.hpp"
#include "dtopo/parallel.hpp"

namespace dtopo {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

std::vector<double> uniform_grid(int n) {
  if (n < 3) throw Error(ErrorKind::InvalidInput, "n_grid must be >= 3");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = static_cast<double>(i) / (n - 1);
  g.back() = 1.0;
  return g;
}

double trapz_weight(std::size_t i, std::size_t n) {
  double h = 1.0 / static_cast<double>(n - 1);
  return (i == 0 || i + 1 == n) ? 0.5 * h : h;
}

// Samples the field from a start state, normalises ∫μ0|u|² = 1.
BlochMode fill_mode(const CellPropagator& prop, const CVec2& start, double kappa, double omega, double mu0,
                    int n_grid) {
  BlochMode m;
  m.kappa = kappa;
  m.omega = omega;
  m.mu0 = mu0;
  m.grid = uniform_grid(n_grid);
  const std::size_t n = m.grid.size();
  m.u.resize(n);
  m.du.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto s = prop.at(start, m.grid[i]);
    m.u[i] = s[0];
    m.du[i] = s[1];
  }
  double nrm2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) nrm2 += trapz_weight(i, n) * mu0 * std::norm(m.u[i]);
  double s = 1.0 / std::sqrt(nrm2);
  for (auto& v : m.u) v *= s;
  for (auto& v : m.du) v *= s;
  m.start = {start[0] * s, start[1] * s};
  m.norm = 1.0;
  // Floquet check: one cell of propagation multiplies the start state by e^{iκ}
  auto end = prop.transfer().apply(m.start);
  cplx mult = std::polar(1.0, kappa);
  double scale = std::max(std::abs(m.start[0]), std::abs(m.start[1]));
  m.floquet_residual =
      std::max(std::abs(end[0] - mult * m.start[0]), std::abs(end[1] - mult * m.start[1])) / scale;
  return m;
}

}  // namespace

BlochMode bloch_mode(const UnitCell& cell, const Media& media, double kappa, double omega, int n_grid) {
  CellPropagator prop(cell, media, omega);
  const TransferMatrix& T = prop.transfer();
  const double f = T.trace();
  if (!(std::abs(2.0 * std::cos(kappa) - f) < 1e-8))
    throw Error(ErrorKind::NotOnBand, "|2cos(kappa) - f(omega)| = " + std::to_string(std::abs(2.0 * std::cos(kappa) - f)));
  const double sk = std::sin(kappa);
  if (std::abs(sk) < 1e-12)
    throw Error(ErrorKind::DegenerateEdge, "kappa at a band edge; use edge_mode");
  // exact eigenvalue of T on the unit circle, on the same side as e^{iκ}
  double fc = std::clamp(f, -2.0, 2.0);
  cplx mu(0.5 * fc, (sk > 0 ? 0.5 : -0.5) * std::sqrt(4.0 - fc * fc));
  CVec2 a{cplx(T.t12), mu - T.t11};
  CVec2 b{mu - T.t22, cplx(T.t21)};
  double na = std::hypot(std::abs(a[0]), std::abs(a[1]));
  double nb = std::hypot(std::abs(b[0]), std::abs(b[1]));
  CVec2 v = na >= nb ? a : b;
  BlochMode m = fill_mode(prop, v, kappa, omega, media.mu0, n_grid);
  // phase: largest |u| sample real positive
  std::size_t imax = 0;
  for (std::size_t i = 1; i < m.u.size(); ++i)
    if (std::abs(m.u[i]) > std::abs(m.u[imax])) imax = i;
  cplx ph = std::conj(m.u[imax]) / std::abs(m.u[imax]);
  for (auto& x : m.u) x *= ph;
  for (auto& x : m.du) x *= ph;
  m.start = {m.start[0] * ph, m.start[1] * ph};
  return m;
}

BlochMode edge_mode(const UnitCell& cell, const Media& media, EdgeKappa edge, double omega, int n_grid) {
  CellPropagator prop(cell, media, omega);
  const TransferMatrix& T = prop.transfer();
  const double mu = edge == EdgeKappa::zero ? 1.0 : -1.0;
  if (!(std::abs(T.trace() - 2.0 * mu) < 1e-8))
    throw Error(ErrorKind::NotOnBand, "edge frequency has |f -+ 2| = " + std::to_string(std::abs(T.trace() - 2.0 * mu)));
  double off = std::max({std::abs(T.t11 - mu), std::abs(T.t12), std::abs(T.t21), std::abs(T.t22 - mu)});
  double scale = std::max({1.0, std::abs(T.t12), std::abs(T.t21)});
  if (off < 1e-8 * scale) throw Error(ErrorKind::DegenerateEdge, "two-dimensional edge eigenspace (gap closed)");
  Vec2 v = eigenvector(T, mu);
  BlochMode m = fill_mode(prop, CVec2{v[0], v[1]}, edge == EdgeKappa::zero ? 0.0 : kPi, omega, media.mu0, n_grid);
  std::size_t imax = 0;
  for (std::size_t i = 1; i < m.u.size(); ++i)
    if (std::abs(m.u[i]) > std::abs(m.u[imax])) imax = i;
  if (m.u[imax].real() < 0) {
    for (auto& x : m.u) x = -x;
    for (auto& x : m.du) x = -x;
    m.start = {-m.start[0], -m.start[1]};
  }
  return m;
}

EdgeSymmetry classify_edge_symmetry(const BlochMode& mode, double tol) {
  EdgeSymmetry es;
  if (std::abs(std::sin(mode.kappa)) > 1e-12)
    throw Error(ErrorKind::InvalidInput, "classify_edge_symmetry needs a kappa in {0, pi} mode");
  es.kappa_edge = std::cos(mode.kappa) > 0 ? EdgeKappa::zero : EdgeKappa::pi;
  double sup_u = 0.0, sup_du = 0.0;
  for (auto& x : mode.u) sup_u = std::max(sup_u, std::abs(x));
  for (auto& x : mode.du) sup_du = std::max(sup_du, std::abs(x));
  es.u_at_0 = std::abs(mode.u.front());
  es.du_at_0 = std::abs(mode.du.front());
  bool u_zero = es.u_at_0 <= tol * sup_u;
  bool du_zero = es.du_at_0 <= tol * sup_du;
  if (u_zero == du_zero)
    throw Error(ErrorKind::AmbiguousSymmetry, std::string(u_zero ? "both" : "neither") +
                                                  " of u(0), u'(0) vanish (|u(0)|=" + std::to_string(es.u_at_0) +
                                                  ", |u'(0)|=" + std::to_string(es.du_at_0) + ")");
  es.symmetric = es.kappa_edge == EdgeKappa::zero ? du_zero : u_zero;
  const double s = es.symmetric ? 1.0 : -1.0;
  const std::size_t n = mode.u.size();
  double r = 0.0;
  for (std::size_t i = 0; i < n; ++i) r = std::max(r, std::abs(mode.u[i] - s * mode.u[n - 1 - i]));
  es.reflection_residual = r / sup_u;
  if (!(es.reflection_residual < tol))
    throw Error(ErrorKind::AmbiguousSymmetry,
                "reflection test failed, residual " + std::to_string(es.reflection_residual));
  return es;
}

BulkIndex bulk_index(const BandGap& gap, const BlochMode& lower_edge_mode) {
  if (std::abs(lower_edge_mode.omega - gap.lower) > 1e-9 * std::max(1.0, gap.lower))
    throw Error(ErrorKind::InvalidInput, "mode is not at the gap's lower edge");
  auto es = classify_edge_symmetry(lower_edge_mode);
  return {gap.index, es.symmetric ? 1 : -1};
}

BulkIndex bulk_index(const UnitCell& cell, const Media& media, const BandGap& gap, int n_grid) {
  EdgeKappa e = gap.lower_kappa == 0.0 ? EdgeKappa::zero : EdgeKappa::pi;
  return bulk_index(gap, edge_mode(cell, media, e, gap.lower, n_grid));
}

cplx inner_product(const BlochMode& a, const BlochMode& b) {
  const std::size_t n = a.u.size();
  if (b.u.size() != n) throw Error(ErrorKind::InvalidInput, "modes sampled on different grids");
  cplx s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += trapz_weight(i, n) * std::conj(a.u[i]) * b.u[i];
  return a.mu0 * s;
}

namespace {

// Edge mode, or for a closed gap the edge vector continuing `neighbour`.
BlochMode loop_edge_mode(const UnitCell& cell, const Media& media, EdgeKappa e, double omega, int n_grid,
                         const BlochMode& neighbour) {
  try {
    return edge_mode(cell, media, e, omega, n_grid);
  } catch (const Error& err) {
    if (err.kind() != ErrorKind::DegenerateEdge) throw;
  }
  // T = ±I: every vector is an eigenvector; the neighbour's start state maximises overlap
  CellPropagator prop(cell, media, omega);
  BlochMode m = fill_mode(prop, neighbour.start, e == EdgeKappa::zero ? 0.0 : kPi, omega, media.mu0, n_grid);
  return m;
}

}  // namespace

std::vector<BlochMode> zak_loop_modes(const UnitCell& cell, const Media& media, const Band& band, int n_kappa,
                                      int n_grid) {
  if (!band.complete()) throw Error(ErrorKind::InvalidInput, "Zak phase needs a fully resolved band");
  if (n_kappa < 5 || n_kappa % 2 == 0) throw Error(ErrorKind::InvalidInput, "n_kappa must be odd and >= 5");
  const int m = n_kappa - 1;
  const int j0 = m / 2;  // κ = 0
  std::vector<BlochMode> modes(static_cast<std::size_t>(m));
  auto kappa_of = [&](int j) { return kPi * (2.0 * j - m) / m; };
  parallel_for(static_cast<std::size_t>(m), [&](std::size_t ju) {
    int j = static_cast<int>(ju);
    if (j == 0 || j == j0) return;
    double k = kappa_of(j);
    modes[ju] = bloch_mode(cell, media, k, band_frequency(cell, media, band, std::abs(k)), n_grid);
  });
  modes[0] = loop_edge_mode(cell, media, EdgeKappa::pi, *band.omega_at_kappa_pi, n_grid, modes[1]);
  modes[0].kappa = -kPi;
  modes[static_cast<std::size_t>(j0)] =
      loop_edge_mode(cell, media, EdgeKappa::zero, *band.omega_at_kappa0, n_grid, modes[static_cast<std::size_t>(j0 - 1)]);
  return modes;
}

void apply_gauge_noise(std::vector<BlochMode>& loop, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(-kPi, kPi);
  for (auto& m : loop) {
    cplx g = std::polar(1.0, phase(rng));
    for (auto& v : m.u) v *= g;
    for (auto& v : m.du) v *= g;
    m.start = {m.start[0] * g, m.start[1] * g};
  }
}

double wilson_loop_phase(const std::vector<BlochMode>& loop) {
  double s = 0.0;
  const std::size_t m = loop.size();
  for (std::size_t j = 0; j < m; ++j) s += std::arg(inner_product(loop[j], loop[(j + 1) % m]));
  double th = std::fmod(-s, kTwoPi);
  if (th < 0) th += kTwoPi;
  if (th >= kTwoPi) th -= kTwoPi;
  return th;
}

double angle_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

ZakPhase zak_phase(const UnitCell& cell, const Media& media, const Band& band, int n_kappa, int n_grid,
                   double stability_tol) {
  ZakPhase z;
  z.band_index = band.index;
  z.theta = wilson_loop_phase(zak_loop_modes(cell, media, band, n_kappa, n_grid));
  z.theta_refined = wilson_loop_phase(zak_loop_modes(cell, media, band, 2 * n_kappa - 1, n_grid));
  double d0 = angle_distance(z.theta, 0.0), dpi = angle_distance(z.theta, kPi);
  z.classified = d0 <= dpi ? 0.0 : kPi;
  z.residual = std::min(d0, dpi);
  if (angle_distance(z.theta, z.theta_refined) > stability_tol)
    throw Error(ErrorKind::NonConvergent, "Zak phase moved by " +
                                              std::to_string(angle_distance(z.theta, z.theta_refined)) +
                                              " when the kappa grid was doubled");
  return z;
}

}  // namespace dtopo
