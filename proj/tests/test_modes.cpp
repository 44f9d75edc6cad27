#include <doctest.h>

#include "dtopo/errors.hpp"
#include "dtopo/modes.hpp"
#include "support.hpp"

using namespace dtopo;

namespace {

template <class F>
bool throws_kind(ErrorKind k, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind() == k;
  }
  return false;
}

std::vector<Band> fixture_bands(const UnitCell& c) { return scan_bands(c, fx::base_media(), fx::kBaseLo, fx::kBaseHi); }

}  // namespace

TEST_CASE("plane wave in a homogeneous cell") {
  const Media m = fx::constant_media(1.0);
  auto mode = bloch_mode(fx::cell_a(), m, 1.0, 1.0, 513);
  CHECK(mode.floquet_residual < 1e-12);
  const cplx u0 = mode.u.front();
  for (std::size_t i = 0; i < mode.grid.size(); i += 64) {
    cplx expect = u0 * std::polar(1.0, mode.grid[i]);
    CHECK(std::abs(mode.u[i] - expect) < 1e-10);
    CHECK(std::abs(mode.du[i] - cplx(0, 1) * expect) < 1e-10);
  }
  CHECK(std::abs(inner_product(mode, mode)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Bloch modes off the band are rejected") {
  const Media m = fx::base_media();
  CHECK(throws_kind(ErrorKind::NotOnBand, [&] { bloch_mode(fx::cell_a(), m, 1.0, 0.94, 257); }));
  CHECK(throws_kind(ErrorKind::DegenerateEdge, [&] { bloch_mode(fx::cell_a(), fx::constant_media(1.0), 0.0, 0.0, 257); }));
}

TEST_CASE("edge modes carry Floquet multipliers of +-1") {
  const Media m = fx::base_media();
  auto gaps = band_gaps(fixture_bands(fx::cell_a()));
  REQUIRE(gaps.size() == 2);
  struct Case {
    EdgeKappa k;
    double w;
    double mu;
  };
  for (auto c : {Case{EdgeKappa::pi, gaps[0].lower, -1.0}, Case{EdgeKappa::zero, gaps[1].lower, 1.0}}) {
    auto mode = edge_mode(fx::cell_a(), m, c.k, c.w, 513);
    auto T = cell_transfer_matrix(fx::cell_a(), m, c.w);
    Vec2 s{mode.start[0].real(), mode.start[1].real()};
    auto ts = T.apply(s);
    CHECK(ts[0] == doctest::Approx(c.mu * s[0]).scale(1.0).epsilon(1e-7));
    CHECK(ts[1] == doctest::Approx(c.mu * s[1]).scale(1.0).epsilon(1e-7));
    for (const auto& x : mode.u) CHECK(x.imag() == 0.0);
    CHECK(mode.u.back().real() == doctest::Approx(c.mu * mode.u.front().real()).scale(1.0).epsilon(1e-7));
  }
  // T = -I in a homogeneous cell at ω = π
  CHECK(throws_kind(ErrorKind::DegenerateEdge,
                    [] { edge_mode(fx::cell_a(), fx::constant_media(1.0), EdgeKappa::pi, fx::kPi, 129); }));
}

TEST_CASE("edge symmetry and bulk indices of the fixture") {
  const Media m = fx::base_media();
  // ω = 0 is a constant field: u' = 0, symmetric
  auto dc = classify_edge_symmetry(edge_mode(fx::cell_a(), m, EdgeKappa::zero, 0.0, 257));
  CHECK(dc.symmetric);
  CHECK(dc.du_at_0 == 0.0);

  auto ga = band_gaps(fixture_bands(fx::cell_a()));
  auto gb = band_gaps(fixture_bands(fx::cell_b()));
  // A: both lower edges antisymmetric; B: symmetric then antisymmetric
  CHECK(bulk_index(fx::cell_a(), m, ga[0]).value == -1);
  CHECK(bulk_index(fx::cell_a(), m, ga[1]).value == -1);
  CHECK(bulk_index(fx::cell_b(), m, gb[0]).value == 1);
  CHECK(bulk_index(fx::cell_b(), m, gb[1]).value == -1);

  for (const auto* gaps : {&ga, &gb}) {
    const UnitCell cell = gaps == &ga ? fx::cell_a() : fx::cell_b();
    for (const auto& g : *gaps) {
      for (auto [k, w] : {std::pair{g.lower_kappa, g.lower}, {g.upper_kappa, g.upper}}) {
        auto e = classify_edge_symmetry(edge_mode(cell, m, k == 0.0 ? EdgeKappa::zero : EdgeKappa::pi, w, 1025));
        CHECK(e.reflection_residual < 1e-6);
        // exactly one of u(0), u'(0) vanishes
        CHECK((e.u_at_0 < 1e-6) != (e.du_at_0 < 1e-6));
      }
    }
  }
  // identical cells give identical indices
  CHECK(bulk_index(fx::cell_a(), m, ga[0]).value == bulk_index(fx::cell_a(), m, ga[0]).value);
  CHECK(throws_kind(ErrorKind::InvalidInput, [&] {
    bulk_index(ga[0], edge_mode(fx::cell_a(), m, EdgeKappa::zero, ga[1].lower, 129));
  }));
}

TEST_CASE("broken mirror symmetry is ambiguous") {
  Structure s = apply_sigma_perturbation(fx::base(), 0.02);
  auto gaps = band_gaps(scan_bands(s.cell_a, s.media, fx::kBaseLo, fx::kBaseHi));
  REQUIRE_FALSE(gaps.empty());
  auto mode = edge_mode(s.cell_a, s.media, gaps[0].lower_kappa == 0.0 ? EdgeKappa::zero : EdgeKappa::pi,
                        gaps[0].lower, 513);
  CHECK(throws_kind(ErrorKind::AmbiguousSymmetry, [&] { classify_edge_symmetry(mode); }));
}

TEST_CASE("Zak phase of a homogeneous band vanishes") {
  const Media m = fx::constant_media(1.0);
  auto bands = scan_bands(fx::cell_a(), m, 0.0, 4.0);
  REQUIRE(bands.size() >= 2);
  REQUIRE(bands[0].complete());
  auto z = zak_phase(fx::cell_a(), m, bands[0], 101, 257);
  CHECK(z.classified == 0.0);
  CHECK(z.residual < 1e-6);

  // brute force: plane waves e^{iκx} on the same κ loop, closed by the κ = -π wave
  const int n = 101, g = 257;
  double sum = 0.0;
  for (int j = 0; j + 1 < n; ++j) {
    double k0 = fx::kPi * (2.0 * j - (n - 1)) / (n - 1);
    double k1 = j + 2 == n ? -fx::kPi : fx::kPi * (2.0 * (j + 1) - (n - 1)) / (n - 1);
    cplx ip = 0.0;
    for (int i = 0; i < g; ++i) {
      double x = static_cast<double>(i) / (g - 1);
      double w = (i == 0 || i == g - 1) ? 0.5 : 1.0;
      ip += w * std::polar(1.0, (k1 - k0) * x);
    }
    sum += std::arg(ip);
  }
  CHECK(angle_distance(-sum, 0.0) < 1e-9);
  CHECK(angle_distance(z.theta, -sum) < 1e-6);
}

TEST_CASE("Zak phases of the fixture match the bulk indices") {
  const Media m = fx::base_media();
  auto ba = fixture_bands(fx::cell_a());
  auto bb = fixture_bands(fx::cell_b());
  std::vector<double> za, zb;
  for (std::size_t i = 0; i < 2; ++i) {
    auto a = zak_phase(fx::cell_a(), m, ba[i], 201, 513);
    auto b = zak_phase(fx::cell_b(), m, bb[i], 201, 513);
    CHECK(a.residual < 1e-6);
    CHECK(b.residual < 1e-6);
    za.push_back(a.classified);
    zb.push_back(b.classified);
  }
  CHECK(za[0] == doctest::Approx(fx::kPi));
  CHECK(zb[0] == 0.0);
  // J_A J_B = exp(i Σ_{m<=n} (Θ_A,m − Θ_B,m)) for each gap n
  auto ga = band_gaps(ba), gb = band_gaps(bb);
  double acc = 0.0;
  for (std::size_t n = 0; n < 2; ++n) {
    acc += za[n] - zb[n];
    int prod = bulk_index(fx::cell_a(), m, ga[n]).value * bulk_index(fx::cell_b(), m, gb[n]).value;
    CHECK(std::cos(acc) == doctest::Approx(prod));
  }
}

TEST_CASE("Wilson loop ignores the gauge of each mode") {
  const Media m = fx::base_media();
  auto bands = fixture_bands(fx::cell_a());
  auto loop = zak_loop_modes(fx::cell_a(), m, bands[0], 41, 257);
  double th = wilson_loop_phase(loop);
  for (unsigned long long seed : {1ULL, 2ULL, 99ULL}) {
    auto noisy = loop;
    apply_gauge_noise(noisy, seed);
    CHECK(angle_distance(wilson_loop_phase(noisy), th) < 1e-10);
  }
  CHECK(throws_kind(ErrorKind::InvalidInput, [&] { zak_loop_modes(fx::cell_a(), m, bands[0], 40, 257); }));
}

TEST_CASE("angle distance") {
  CHECK(angle_distance(0.1, 2 * fx::kPi - 0.1) == doctest::Approx(0.2));
  CHECK(angle_distance(fx::kPi, -fx::kPi) == doctest::Approx(0.0).scale(1.0));
}
