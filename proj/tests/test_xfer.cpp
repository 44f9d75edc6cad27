#include <doctest.h>

#include <random>

#include "dtopo/errors.hpp"
#include "dtopo/xfer.hpp"
#include "support.hpp"

using namespace dtopo;

namespace {

void check_matrix(const TransferMatrix& a, const TransferMatrix& b, double tol) {
  CHECK(a.t11 == doctest::Approx(b.t11).epsilon(tol).scale(1.0));
  CHECK(a.t12 == doctest::Approx(b.t12).epsilon(tol).scale(1.0));
  CHECK(a.t21 == doctest::Approx(b.t21).epsilon(tol).scale(1.0));
  CHECK(a.t22 == doctest::Approx(b.t22).epsilon(tol).scale(1.0));
}

}  // namespace

TEST_CASE("segment matrix closed forms") {
  // ω = 0: u'' = 0, so u(ℓ) = u + ℓu'
  check_matrix(segment_matrix(0.37, 2.0, 0.0), {1.0, 0.37, 0.0, 1.0}, 1e-15);
  check_matrix(segment_matrix(0.5, 1.0, fx::kPi), {0.0, 1.0 / fx::kPi, -fx::kPi, 0.0}, 1e-15);
  check_matrix(segment_matrix(1.0, -1.0, 1.0), {std::cosh(1.0), std::sinh(1.0), std::sinh(1.0), std::cosh(1.0)},
               1e-15);
  auto h = segment_matrix(1.0, -1.0, 1.0);
  CHECK(h.det() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("segment matrix is continuous across the series branch") {
  for (double eps : {1.0, -1.0}) {
    for (double w : {0.9e-4, 1.1e-4}) {  // z = ε ω² straddles 1e-8
      auto m = segment_matrix(1.0, eps, w);
      double k2 = eps * w * w;
      double c = eps > 0 ? std::cos(std::sqrt(k2)) : std::cosh(std::sqrt(-k2));
      CHECK(m.t11 == doctest::Approx(c).epsilon(1e-15));
      CHECK(m.t21 == doctest::Approx(-k2).epsilon(1e-8));
    }
  }
}

TEST_CASE("segment and cell matrices are unimodular") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Media fm = fx::base_media();
  double worst = 0.0;
  for (int i = 0; i < 2000; ++i) {
    auto s = segment_matrix(1e-3 + u(rng), -2.0 + 22.0 * u(rng), 2.0 * u(rng), 0.5 + u(rng));
    worst = std::max(worst, std::abs(s.det() - 1.0));
    try {
      worst = std::max(worst, std::abs(cell_transfer_matrix(fx::cell_a(), fm, 0.99 * u(rng)).det() - 1.0));
    } catch (const Error&) {
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("cell matrix agrees with direct integration") {
  const Media m = fx::base_media();
  for (double w : {0.3, 0.8, 0.94, 0.985, 1.2}) {
    auto t = cell_transfer_matrix(fx::cell_a(), m, w);
    auto r = fx::rk4_cell(fx::cell_a(), m, w);
    check_matrix(t, r, 1e-9);
  }
  // asymmetric cell, species-2 first layer, μ0 ≠ 1
  Media m2 = m;
  m2.mu0 = 1.7;
  UnitCell c{{{0.3, 2}, {0.45, 1}, {0.25, 2}}, "x"};
  check_matrix(cell_transfer_matrix(c, m2, 0.6), fx::rk4_cell(c, m2, 0.6), 1e-9);
}

TEST_CASE("homogeneous cell collapses to one segment") {
  const Media m = fx::constant_media(2.5);
  for (double w : {0.0, 0.4, 3.0}) {
    check_matrix(cell_transfer_matrix(fx::cell_a(), m, w), segment_matrix(1.0, 2.5, w), 1e-13);
    CHECK(discriminant(fx::cell_a(), m, w) == doctest::Approx(2 * std::cos(std::sqrt(2.5) * w)).epsilon(1e-13));
  }
  const Media one = fx::constant_media(1.0);
  CHECK(discriminant(fx::cell_b(), one, 1.3) == doctest::Approx(2 * std::cos(1.3)).epsilon(1e-14));
}

TEST_CASE("trace is invariant under reversal") {
  const Media m = fx::base_media();
  UnitCell c{{{0.2, 1}, {0.3, 2}, {0.5, 1}}, "x"};
  for (double w : {0.2, 0.9, 1.1})
    CHECK(discriminant(c, m, w) == doctest::Approx(discriminant(reversed(c), m, w)).epsilon(1e-13));
  // first-band sample of the fixture lies inside [-2, 2]
  CHECK(std::abs(discriminant(fx::cell_a(), m, 0.5)) <= 2.0);
}

TEST_CASE("eigen system") {
  auto es = eigen_system({2.0, 0.0, 0.0, 0.5});
  CHECK(es.lambda1 == doctest::Approx(0.5));
  CHECK(es.lambda2 == doctest::Approx(2.0));
  CHECK(es.v1[0] == doctest::Approx(0.0));
  CHECK(es.v1[1] == doctest::Approx(1.0));
  CHECK(es.v2[0] == doctest::Approx(1.0));

  bool inside = false;
  try {
    eigen_system({1.0, 0.0, 0.0, 1.0});
  } catch (const Error& e) {
    inside = e.kind() == ErrorKind::InsideBand;
  }
  CHECK(inside);

  // negative trace in the fixture's first gap
  auto t = cell_transfer_matrix(fx::cell_a(), fx::base_media(), 0.94);
  auto g = eigen_system(t);
  CHECK(std::abs(g.lambda1) < 1.0);
  CHECK(g.lambda1 * g.lambda2 == doctest::Approx(1.0));
  for (auto [lam, v] : {std::pair{g.lambda1, g.v1}, {g.lambda2, g.v2}}) {
    auto tv = t.apply(v);
    CHECK(tv[0] == doctest::Approx(lam * v[0]).scale(1.0).epsilon(1e-12));
    CHECK(tv[1] == doctest::Approx(lam * v[1]).scale(1.0).epsilon(1e-12));
    CHECK(std::hypot(v[0], v[1]) == doctest::Approx(1.0));
  }
}

TEST_CASE("propagator samples the cell") {
  const Media m = fx::base_media();
  CellPropagator p(fx::cell_a(), m, 0.7);
  CHECK(p.layer_at(0.0) == 0);
  CHECK(p.layer_at(0.1) == 1);
  CHECK(p.layer_at(0.99) == 4);
  CHECK(p.layer_at(1.0) == 4);
  CHECK(p.eps_first() == m.eps(1, 0.7));
  CHECK(p.eps_at(0.5) == m.eps(1, 0.7));
  CHECK(p.eps_at(0.2) == m.eps(2, 0.7));
  auto full = jump_matrix(p.eps_last(), p.eps_first()) * p.partial(1.0);
  check_matrix(full, p.transfer(), 1e-14);
  // flux u'/ε is continuous across a layer boundary
  Vec2 s{0.3, -1.1};
  auto l = p.at(s, 0.35 - 1e-12);
  auto r = p.at(s, 0.35);
  CHECK(l[1] / m.eps(2, 0.7) == doctest::Approx(r[1] / m.eps(1, 0.7)).epsilon(1e-9));
  CHECK(l[0] == doctest::Approx(r[0]).epsilon(1e-9));
}
