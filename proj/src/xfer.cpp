#include "dtopo/xfer.hpp"

#include <algorithm>
#include <cmath>

#include "dtopo/errors.hpp"

namespace dtopo {

TransferMatrix TransferMatrix::inverse() const { return {t22, -t12, -t21, t11}; }

TransferMatrix operator*(const TransferMatrix& a, const TransferMatrix& b) {
  return {a.t11 * b.t11 + a.t12 * b.t21, a.t11 * b.t12 + a.t12 * b.t22,
          a.t21 * b.t11 + a.t22 * b.t21, a.t21 * b.t12 + a.t22 * b.t22};
}

namespace {

// C(z) = cos √z and S(z) = sin √z / √z, continued to z < 0 and expanded near 0.
void entire_cs(double z, double& c, double& s) {
  if (std::abs(z) < 1e-8) {
    double tc = 1.0, ts = 1.0;
    c = 0.0;
    s = 0.0;
    for (int k = 0; k < 6; ++k) {
      c += tc;
      s += ts;
      tc *= -z / ((2.0 * k + 1) * (2.0 * k + 2));
      ts *= -z / ((2.0 * k + 2) * (2.0 * k + 3));
    }
  } else if (z > 0) {
    double r = std::sqrt(z);
    c = std::cos(r);
    s = std::sin(r) / r;
  } else {
    double r = std::sqrt(-z);
    c = std::cosh(r);
    s = std::sinh(r) / r;
  }
}

}  // namespace

TransferMatrix segment_matrix(double length, double eps, double omega, double mu0) {
  double m = mu0 * eps * omega * omega;
  double c, s;
  entire_cs(m * length * length, c, s);
  return {c, length * s, -m * length * s, c};
}

TransferMatrix jump_matrix(double eps_from, double eps_to) { return {1.0, 0.0, 0.0, eps_to / eps_from}; }

TransferMatrix cell_transfer_matrix(const UnitCell& cell, const Media& media, double omega) {
  return CellPropagator(cell, media, omega).transfer();
}

double discriminant(const UnitCell& cell, const Media& media, double omega) {
  return cell_transfer_matrix(cell, media, omega).trace();
}

Vec2 eigenvector(const TransferMatrix& T, double lambda) {
  Vec2 a{T.t12, lambda - T.t11};
  Vec2 b{lambda - T.t22, T.t21};
  double na = std::hypot(a[0], a[1]);
  double nb = std::hypot(b[0], b[1]);
  if (na == 0.0 && nb == 0.0) return {1.0, 0.0};  // T = λI
  Vec2 v = na >= nb ? a : b;
  double n = std::max(na, nb);
  return {v[0] / n, v[1] / n};
}

namespace {

Vec2 sign_fix(Vec2 v) {
  double ref = std::abs(v[0]) > 1e-14 ? v[0] : v[1];
  if (ref < 0) return {-v[0], -v[1]};
  return v;
}

}  // namespace

CellEigenSystem eigen_system(const TransferMatrix& T, double eta_edge) {
  double t = T.trace();
  if (!(std::abs(t) > 2.0 + eta_edge))
    throw Error(ErrorKind::InsideBand, "|trace|=" + std::to_string(std::abs(t)) + " <= 2 + eta_edge");
  CellEigenSystem es;
  es.trace = t;
  double sg = t > 0 ? 1.0 : -1.0;
  es.lambda2 = 0.5 * (t + sg * std::sqrt(t * t - 4.0));
  es.lambda1 = 1.0 / es.lambda2;
  es.v1 = sign_fix(eigenvector(T, es.lambda1));
  es.v2 = sign_fix(eigenvector(T, es.lambda2));
  return es;
}

CellPropagator::CellPropagator(const UnitCell& cell, const Media& media, double omega)
    : omega_(omega), mu0_(media.mu0) {
  validate_cell(cell);
  double x = 0.0;
  TransferMatrix acc;  // identity
  for (std::size_t i = 0; i < cell.layers.size(); ++i) {
    double e = media.eps(cell.layers[i].species, omega);
    if (i > 0) acc = jump_matrix(eps_.back(), e) * acc;
    x0_.push_back(x);
    eps_.push_back(e);
    to_layer_.push_back(acc);
    acc = segment_matrix(cell.layers[i].length, e, omega, mu0_) * acc;
    x += cell.layers[i].length;
  }
  // wrap into the first layer of the next cell
  cell_ = jump_matrix(eps_.back(), eps_.front()) * acc;
  x0_.push_back(1.0);
}

std::size_t CellPropagator::layer_at(double x) const {
  auto it = std::upper_bound(x0_.begin(), x0_.end() - 1, x);
  std::size_t k = static_cast<std::size_t>(it - x0_.begin());
  if (k == 0) return 0;
  return std::min(k - 1, eps_.size() - 1);
}

TransferMatrix CellPropagator::partial(double x) const {
  std::size_t k = layer_at(x);
  double dx = x - x0_[k];
  if (dx <= 0.0) return to_layer_[k];
  return segment_matrix(dx, eps_[k], omega_, mu0_) * to_layer_[k];
}

}  // namespace dtopo
