#include "dtopo/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "dtopo/errors.hpp"
#include "dtopo/parallel.hpp"
#include "dtopo/spectrum.hpp"

namespace dtopo {

namespace {

using cd = std::complex<double>;

struct Interval {
  double h;
  double e;  // 1/ε
};

int intervals_for(double len, int n) { return std::max(1, static_cast<int>(std::ceil(len * n - 1e-9))); }

void append_cell(std::vector<Interval>& out, const UnitCell& cell, const Media& media, double omega, int n) {
  for (const auto& l : cell.layers) {
    int k = intervals_for(l.length, n);
    double e = 1.0 / media.eps(l.species, omega);
    for (int i = 0; i < k; ++i) out.push_back({l.length / k, e});
  }
}

// Uniform grid; 1/ε averaged over each interval (harmonic mean of ε).
std::vector<Interval> uniform_cell(const UnitCell& cell, const Media& media, double omega, int n) {
  std::vector<double> x0, inv;
  double x = 0.0;
  for (const auto& l : cell.layers) {
    x0.push_back(x);
    inv.push_back(1.0 / media.eps(l.species, omega));
    x += l.length;
  }
  x0.push_back(1.0);
  std::vector<Interval> out;
  double h = 1.0 / n;
  for (int j = 0; j < n; ++j) {
    double a = j * h, b = (j + 1) * h, acc = 0.0;
    for (std::size_t k = 0; k < inv.size(); ++k) {
      double ov = std::min(b, x0[k + 1]) - std::max(a, x0[k]);
      if (ov > 0) acc += ov * inv[k];
    }
    out.push_back({h, acc / h});
  }
  return out;
}

}  // namespace

std::vector<std::complex<double>> DiscreteOperator::dense() const {
  const std::size_t n = size();
  std::vector<cd> k(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) k[i * n + i] = diag[i];
  for (std::size_t i = 0; i + 1 < n; ++i) {
    k[i * n + i + 1] += off[i];
    k[(i + 1) * n + i] += off[i];
  }
  if (periodic) {
    cd c = wrap * std::polar(1.0, kappa);
    k[(n - 1) * n + 0] += c;
    k[0 * n + n - 1] += std::conj(c);
  }
  return k;
}

DiscreteOperator assemble_bloch_operator(const UnitCell& cell, const Media& media, double kappa, double omega, int n,
                                         bool align_to_layers) {
  validate_cell(cell);
  if (n < 3) throw Error(ErrorKind::InvalidInput, "oracle grid too small");
  std::vector<Interval> iv;
  if (align_to_layers)
    append_cell(iv, cell, media, omega, n);
  else
    iv = uniform_cell(cell, media, omega, n);
  const std::size_t m = iv.size();
  DiscreteOperator op;
  op.kappa = kappa;
  op.omega = omega;
  op.mu0 = media.mu0;
  op.periodic = true;
  op.diag.resize(m);
  op.mass.resize(m);
  op.off.resize(m - 1);
  double x = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const Interval& l = iv[(j + m - 1) % m];  // interval to the left of node j
    const Interval& r = iv[j];
    op.x.push_back(x);
    x += r.h;
    op.diag[j] = l.e / l.h + r.e / r.h;
    op.mass[j] = 0.5 * (l.h + r.h);
    if (j + 1 < m) op.off[j] = -r.e / r.h;
  }
  // u_m = e^{iκ} u_0 closes the last interval
  op.wrap = -iv[m - 1].e / iv[m - 1].h;
  return op;
}

DiscreteOperator assemble_finite_operator(const Structure& s, int n_cells_per_side, double omega, int n_per_cell) {
  std::vector<Interval> iv;
  for (int c = 0; c < n_cells_per_side; ++c) append_cell(iv, s.cell_a, s.media, omega, n_per_cell);
  for (int c = 0; c < n_cells_per_side; ++c) append_cell(iv, s.cell_b, s.media, omega, n_per_cell);
  DiscreteOperator op;
  op.omega = omega;
  op.mu0 = s.media.mu0;
  op.periodic = false;
  // unknowns are the interior nodes 1..m-1 between the clamped ends
  const std::size_t m = iv.size();
  double x = -static_cast<double>(n_cells_per_side);
  for (std::size_t j = 1; j < m; ++j) {
    x += iv[j - 1].h;
    const Interval& l = iv[j - 1];
    const Interval& r = iv[j];
    op.x.push_back(x);
    op.diag.push_back(l.e / l.h + r.e / r.h);
    op.mass.push_back(0.5 * (l.h + r.h));
    if (j + 1 < m) op.off.push_back(-r.e / r.h);
  }
  return op;
}

int count_below(const DiscreteOperator& op) {
  const std::size_t n = op.size();
  const double lam = op.mu0 * op.omega * op.omega;
  std::vector<double> a(n);
  double scale = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    a[j] = op.diag[j] - lam * op.mass[j];
    scale = std::max(scale, std::abs(op.diag[j]));
  }
  const double tiny = 1e-300 + 1e-15 * scale * std::numeric_limits<double>::epsilon();
  auto pivot = [&](double p) { return std::abs(p) < tiny ? tiny : p; };
  int neg = 0;
  if (!op.periodic || n < 3) {
    double p = pivot(a[0]);
    neg += p < 0;
    for (std::size_t j = 1; j < n; ++j) {
      p = pivot(a[j] - op.off[j - 1] * op.off[j - 1] / p);
      neg += p < 0;
    }
    return neg;
  }
  // cyclic: eliminate nodes 0..n-2 in order; c[j] is the coupling of node j to node n-1
  std::vector<cd> c(n - 1, 0.0);
  c[0] = std::conj(op.wrap * std::polar(1.0, op.kappa));
  c[n - 2] += op.off[n - 2];
  double last = a[n - 1];
  for (std::size_t j = 0; j + 2 < n; ++j) {
    double p = pivot(a[j]);
    neg += p < 0;
    double b = op.off[j];
    a[j + 1] -= b * b / p;
    c[j + 1] -= b * c[j] / p;
    last -= std::norm(c[j]) / p;
  }
  double p = pivot(a[n - 2]);
  neg += p < 0;
  last -= std::norm(c[n - 2]) / p;
  neg += pivot(last) < 0;
  return neg;
}

namespace {

using Counter = std::function<int(double)>;

void roots_in(const Counter& count, double a, int ca, double b, int cb, int depth, std::vector<double>& out) {
  if (ca == cb) return;
  if (std::abs(cb - ca) == 1) {
    for (int it = 0; it < 200; ++it) {
      double m = 0.5 * (a + b);
      if (m <= a || m >= b) break;
      int cm = count(m);
      if (cm == ca) {
        a = m;
      } else if (cm == cb) {
        b = m;
      } else {
        roots_in(count, a, ca, m, cm, depth + 1, out);
        roots_in(count, m, cm, b, cb, depth + 1, out);
        return;
      }
    }
    out.push_back(0.5 * (a + b));
    return;
  }
  if (depth > 12 || b - a < 1e-12 * std::max(1.0, b))
    throw Error(ErrorKind::BranchCrossing, std::to_string(std::abs(cb - ca)) +
                                               " eigenvalue branches cross omega^2 within one bracket near omega=" +
                                               std::to_string(a));
  const int k = 8;
  double prev = a;
  int cprev = ca;
  for (int i = 1; i <= k; ++i) {
    double x = i == k ? b : a + (b - a) * i / k;
    int cx = i == k ? cb : count(x);
    roots_in(count, prev, cprev, x, cx, depth + 1, out);
    prev = x;
    cprev = cx;
  }
}

std::vector<double> scan_roots(const Counter& count, const std::vector<std::pair<double, double>>& windows, int n_scan) {
  std::vector<double> roots;
  for (auto [lo, hi] : windows) {
    const std::size_t n = static_cast<std::size_t>(std::max(2, n_scan));
    std::vector<double> om(n);
    std::vector<int> cnt(n);
    for (std::size_t i = 0; i < n; ++i) om[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    om[n - 1] = hi;
    parallel_for(n, [&](std::size_t i) { cnt[i] = count(om[i]); });
    for (std::size_t i = 0; i + 1 < n; ++i) roots_in(count, om[i], cnt[i], om[i + 1], cnt[i + 1], 0, roots);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace

std::vector<double> oracle_band_frequencies(const UnitCell& cell, const Media& media, double kappa, double lo,
                                            double hi, int n, const OracleOptions& opt) {
  if (n < 500) throw Error(ErrorKind::InvalidInput, "oracle grid must have N >= 500");
  auto windows = split_window(media, lo, hi);
  Counter count = [&](double w) {
    return count_below(assemble_bloch_operator(cell, media, kappa, w, n, opt.align_to_layers));
  };
  return scan_roots(count, windows, opt.n_scan);
}

OracleVector oracle_eigenvector(const DiscreteOperator& op) {
  const int n = static_cast<int>(op.size());
  const double lam = op.mu0 * op.omega * op.omega * (1.0 + 1e-10);
  std::vector<Eigen::Triplet<cd>> trip;
  for (int j = 0; j < n; ++j) trip.emplace_back(j, j, op.diag[j] - lam * op.mass[j]);
  for (int j = 0; j + 1 < n; ++j) {
    trip.emplace_back(j, j + 1, op.off[j]);
    trip.emplace_back(j + 1, j, op.off[j]);
  }
  if (op.periodic) {
    cd c = op.wrap * std::polar(1.0, op.kappa);
    trip.emplace_back(n - 1, 0, c);
    trip.emplace_back(0, n - 1, std::conj(c));
  }
  Eigen::SparseMatrix<cd> H(n, n);
  H.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<cd>> lu;
  lu.compute(H);
  if (lu.info() != Eigen::Success) throw Error(ErrorKind::NonConvergent, "oracle LU factorisation failed");
  Eigen::VectorXcd v = Eigen::VectorXcd::Ones(n);
  for (int it = 0; it < 4; ++it) {
    Eigen::VectorXcd rhs(n);
    for (int j = 0; j < n; ++j) rhs[j] = op.mass[static_cast<std::size_t>(j)] * v[j];
    v = lu.solve(rhs);
    v /= v.norm();
  }
  OracleVector out;
  out.x = op.x;
  out.mass = op.mass;
  out.u.assign(v.data(), v.data() + n);
  return out;
}

std::vector<OracleRoot> oracle_finite_interface(const Structure& s, int n_cells_per_side, double lo, double hi,
                                                int n_per_cell, const OracleOptions& opt) {
  validate_cell(s.cell_a);
  validate_cell(s.cell_b);
  auto windows = split_window(s.media, lo, hi);
  Counter count = [&](double w) { return count_below(assemble_finite_operator(s, n_cells_per_side, w, n_per_cell)); };
  auto roots = scan_roots(count, windows, opt.n_scan);
  std::vector<OracleRoot> out(roots.size());
  const double half = 0.5 * n_cells_per_side;
  parallel_for(roots.size(), [&](std::size_t i) {
    auto v = oracle_eigenvector(assemble_finite_operator(s, n_cells_per_side, roots[i], n_per_cell));
    double near = 0.0, total = 0.0;
    for (std::size_t j = 0; j < v.u.size(); ++j) {
      double e = v.mass[j] * std::norm(v.u[j]);
      total += e;
      if (std::abs(v.x[j]) < half) near += e;
    }
    out[i].omega = roots[i];
    out[i].score = std::clamp(2.0 * near / total - 1.0, 0.0, 1.0);
  });
  return out;
}

}  // namespace dtopo
