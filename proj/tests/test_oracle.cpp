#include <doctest.h>

#include <Eigen/Dense>

#include "dtopo/errors.hpp"
#include "dtopo/modes.hpp"
#include "dtopo/oracle.hpp"
#include "dtopo/spectrum.hpp"
#include "support.hpp"

using namespace dtopo;

namespace {

constexpr double kOmegaM = 0.9417644997104898;

// eigenvalues of M^{-1/2} K M^{-1/2} below μ0 ω², by dense diagonalisation
int dense_count(const DiscreteOperator& op) {
  const int n = static_cast<int>(op.size());
  auto k = op.dense();
  Eigen::MatrixXcd h(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) h(i, j) = k[i * n + j] / std::sqrt(op.mass[i] * op.mass[j]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const double lam = op.mu0 * op.omega * op.omega;
  int c = 0;
  for (int i = 0; i < n; ++i) c += es.eigenvalues()[i] < lam;
  return c;
}

GapIntersection first_gap(const Structure& s) {
  auto ga = band_gaps(scan_bands(s.cell_a, s.media, fx::kBaseLo, fx::kBaseHi));
  auto gb = band_gaps(scan_bands(s.cell_b, s.media, fx::kBaseLo, fx::kBaseHi));
  return intersect_gaps(ga, gb).front();
}

}  // namespace

TEST_CASE("inertia count matches dense eigenvalues") {
  const Media m = fx::base_media();
  for (double kap : {0.0, 0.7, fx::kPi})
    for (double w : {0.3, 0.94, 0.97, 1.4, 9.0}) {
      auto op = assemble_bloch_operator(fx::cell_a(), m, kap, w, 40);
      CHECK(count_below(op) == dense_count(op));
    }
  for (double w : {0.5, 0.94, 3.0}) {
    auto op = assemble_finite_operator(fx::base(), 3, w, 20);
    CHECK_FALSE(op.periodic);
    CHECK(count_below(op) == dense_count(op));
  }
}

TEST_CASE("homogeneous medium: ω = κ") {
  auto r = oracle_band_frequencies(fx::cell_a(), fx::constant_media(1.0), 1.0, 0.5, 1.5, 1000);
  REQUIRE(r.size() == 1);
  CHECK(r[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(oracle_band_frequencies(fx::cell_a(), fx::constant_media(1.0), 1.0, 0.5, 1.5, 400), Error);
}

TEST_CASE("oracle agrees with the transfer-matrix bands") {
  const Media m = fx::base_media();
  for (const auto& cell : {fx::cell_a(), fx::cell_b()}) {
    auto bands = scan_bands(cell, m, fx::kBaseLo, fx::kBaseHi);
    for (bool aligned : {true, false}) {
      auto r = oracle_band_frequencies(cell, m, fx::kPi / 2, 1e-3, 0.99, 2000, {200, aligned});
      REQUIRE(r.size() == 2);
      for (int i = 0; i < 2; ++i) {
        double w = band_frequency(cell, m, bands[i], fx::kPi / 2);
        CHECK(std::abs(r[i] - w) / w < 1e-3);
      }
    }
  }
}

TEST_CASE("window across the pole") {
  Media m = fx::base_media();
  m.eta_pole = 1e-2;
  auto r = oracle_band_frequencies(fx::cell_a(), m, fx::kPi / 2, 0.9, 1.3, 1000);
  bool below = false, above = false;
  for (double w : r) {
    CHECK(std::abs(w - 1.0) > 1e-6);
    below = below || w < 1.0;
    above = above || w > 1.0;
  }
  CHECK(below);
  CHECK(above);
}

TEST_CASE("oracle eigenvector is the Bloch mode") {
  const Media m = fx::base_media();
  auto r = oracle_band_frequencies(fx::cell_a(), m, fx::kPi / 2, 1e-3, 0.9, 2000);
  REQUIRE(r.size() == 1);
  auto bands = scan_bands(fx::cell_a(), m, fx::kBaseLo, fx::kBaseHi);
  double w = band_frequency(fx::cell_a(), m, bands[0], fx::kPi / 2);
  auto v = oracle_eigenvector(assemble_bloch_operator(fx::cell_a(), m, fx::kPi / 2, r[0], 2000));
  auto b = bloch_mode(fx::cell_a(), m, fx::kPi / 2, w, 2001);
  REQUIRE(v.u.size() == 2000);
  cplx num = 0.0;
  double den = 0.0, peak = 0.0;
  for (std::size_t j = 0; j < v.u.size(); ++j) {
    REQUIRE(v.x[j] == doctest::Approx(b.grid[j]).epsilon(1e-12));
    num += std::conj(v.u[j]) * b.u[j];
    den += std::norm(v.u[j]);
    peak = std::max(peak, std::abs(b.u[j]));
  }
  const cplx c = num / den;
  double err = 0.0;
  for (std::size_t j = 0; j < v.u.size(); ++j) err = std::max(err, std::abs(c * v.u[j] - b.u[j]));
  CHECK(err / peak < 1e-3);
}

TEST_CASE("finite interface structure") {
  const Structure s = fx::base();
  const auto g = first_gap(s);
  auto roots = oracle_finite_interface(s, 20, g.lower, g.upper, 200);
  int localized = 0;
  for (const auto& r : roots) {
    if (r.score < 0.9) continue;
    ++localized;
    CHECK(std::abs(r.omega - kOmegaM) / kOmegaM < 1e-3);
  }
  CHECK(localized == 1);

  // A|A has no interface: nothing localized in the gap
  Structure aa = s;
  aa.cell_b = fx::cell_a();
  for (const auto& r : oracle_finite_interface(aa, 20, g.lower, g.upper, 200)) CHECK(r.score < 0.5);
}
