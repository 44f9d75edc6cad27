#pragma once

#include <array>
#include <complex>
#include <vector>

#include "dtopo/materials.hpp"

namespace dtopo {

inline constexpr double kEtaEdge = 1e-9;

// Acts on column vectors (u, u').
struct TransferMatrix {
  double t11 = 1.0, t12 = 0.0, t21 = 0.0, t22 = 1.0;

  double trace() const { return t11 + t22; }
  double det() const { return t11 * t22 - t12 * t21; }
  TransferMatrix inverse() const;  // assumes det = 1

  template <class T>
  std::array<T, 2> apply(const std::array<T, 2>& v) const {
    return {t11 * v[0] + t12 * v[1], t21 * v[0] + t22 * v[1]};
  }
};

TransferMatrix operator*(const TransferMatrix& a, const TransferMatrix& b);

using Vec2 = std::array<double, 2>;
using CVec2 = std::array<std::complex<double>, 2>;

TransferMatrix segment_matrix(double length, double eps, double omega, double mu0 = 1.0);

// u is continuous across a material jump, (1/ε)u' too, so u' picks up ε_to/ε_from.
TransferMatrix jump_matrix(double eps_from, double eps_to);

// Maps (u, u') just inside the first layer at x_n to the same point of the next cell.
TransferMatrix cell_transfer_matrix(const UnitCell& cell, const Media& media, double omega);
double discriminant(const UnitCell& cell, const Media& media, double omega);

struct CellEigenSystem {
  double lambda1 = 0.0;  // |λ1| < 1
  double lambda2 = 0.0;  // |λ2| > 1
  Vec2 v1{};
  Vec2 v2{};
  double trace = 0.0;
};

CellEigenSystem eigen_system(const TransferMatrix& T, double eta_edge = kEtaEdge);

// Unit eigenvector of T for a real eigenvalue, sign left as computed.
Vec2 eigenvector(const TransferMatrix& T, double lambda);

// Samples the field inside one cell given the state just inside its first layer.
class CellPropagator {
 public:
  CellPropagator(const UnitCell& cell, const Media& media, double omega);

  const TransferMatrix& transfer() const { return cell_; }
  double eps_first() const { return eps_.front(); }
  double eps_last() const { return eps_.back(); }
  // Layer holding x; x = 1 maps to the last layer.
  std::size_t layer_at(double x) const;
  double eps_at(double x) const { return eps_[layer_at(x)]; }
  // Matrix taking the start state to (u, u') at x (inside layer_at(x)).
  TransferMatrix partial(double x) const;

  template <class T>
  std::array<T, 2> at(const std::array<T, 2>& start, double x) const {
    return partial(x).apply(start);
  }

 private:
  std::vector<double> x0_;    // layer start positions
  std::vector<double> eps_;   // layer permittivities
  std::vector<TransferMatrix> to_layer_;  // start state -> state at layer start
  double omega_, mu0_;
  TransferMatrix cell_;
};

}  // namespace dtopo
