#include <doctest.h>

#include <random>

#include "dtopo/errors.hpp"
#include "dtopo/materials.hpp"
#include "support.hpp"

using namespace dtopo;

namespace {

PermittivityModel lorentz() { return {1.0, 2.0, 1.0}; }

bool throws_kind(ErrorKind k, auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind() == k;
  }
  return false;
}

void check_layers(const UnitCell& c, std::vector<double> expect) {
  REQUIRE(c.layers.size() == expect.size());
  double total = 0.0;
  for (std::size_t i = 0; i < expect.size(); ++i) {
    CHECK(c.layers[i].length == doctest::Approx(expect[i]).epsilon(1e-14));
    total += c.layers[i].length;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

}  // namespace

TEST_CASE("permittivity values") {
  CHECK(eval_permittivity(lorentz(), 0.0) == 3.0);
  CHECK(eval_permittivity(lorentz(), std::sqrt(2.0)) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(throws_kind(ErrorKind::PoleProximity, [] { eval_permittivity(lorentz(), 1.0); }));
  CHECK(throws_kind(ErrorKind::PoleProximity, [] { eval_permittivity(lorentz(), 1.0 + 1e-7); }));
  CHECK_NOTHROW(eval_permittivity(lorentz(), 1.0 + 1e-5));
  CHECK(lorentz().pole().value() == 1.0);
  CHECK_FALSE(PermittivityModel{2.0, 0.0, 0.0}.pole().has_value());
}

TEST_CASE("permittivity with a 1/omega^2 term") {
  PermittivityModel m = lorentz();
  m.pert_kind = PerturbationKind::inverse_sq_decreasing;
  m.pert_delta = 0.5;
  CHECK(eval_permittivity(m, 2.0) == doctest::Approx(1.0 + 2.0 / (1.0 - 4.0) - 0.5 / 4.0));
  m.pert_kind = PerturbationKind::inverse_sq_increasing;
  CHECK(eval_permittivity(m, 2.0) == doctest::Approx(1.0 + 2.0 / (1.0 - 4.0) + 0.5 / 4.0));
  CHECK(throws_kind(ErrorKind::PoleProximity, [&] { eval_permittivity(m, 0.0); }));
  CHECK(throws_kind(ErrorKind::PoleProximity, [&] { permittivity_derivative(m, 1.0); }));
  CHECK(perturbation_from_string(to_string(PerturbationKind::inverse_sq_increasing)) ==
        PerturbationKind::inverse_sq_increasing);
  CHECK(throws_kind(ErrorKind::InvalidInput, [] { perturbation_from_string("cubic"); }));
}

TEST_CASE("permittivity derivative") {
  CHECK(permittivity_derivative(lorentz(), 0.0) == 0.0);
  CHECK(permittivity_derivative(lorentz(), 2.0) == doctest::Approx(8.0 / 9.0).epsilon(1e-14));

  // against central differences, perturbed or not
  for (auto kind : {PerturbationKind::none, PerturbationKind::inverse_sq_decreasing,
                    PerturbationKind::inverse_sq_increasing}) {
    PermittivityModel m = lorentz();
    m.pert_kind = kind;
    m.pert_delta = 0.3;
    for (double w : {0.3, 0.7, 1.4, 2.5}) {
      const double h = 1e-6;
      double fd = (eval_permittivity(m, w + h) - eval_permittivity(m, w - h)) / (2 * h);
      CHECK(permittivity_derivative(m, w) == doctest::Approx(fd).epsilon(1e-7));
    }
  }
}

TEST_CASE("unperturbed derivative is never negative") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (int i = 0; i < 5000; ++i) {
    PermittivityModel m{u(rng) * 10 - 5, u(rng) * 5, u(rng) * 3};
    double w = u(rng) * 4;
    try {
      CHECK(permittivity_derivative(m, w) >= 0.0);
      ++checked;
    } catch (const Error&) {
    }
  }
  CHECK(checked > 4900);
}

TEST_CASE("mirror symmetry") {
  CHECK(is_mirror_symmetric(fx::cell_a()));
  CHECK(is_mirror_symmetric(fx::cell_b()));
  CHECK_FALSE(is_mirror_symmetric({{{0.5, 1}, {0.5, 2}}, "x"}));
  CHECK(is_mirror_symmetric({{{1.0, 1}}, "x"}));
  UnitCell r = reversed({{{0.2, 1}, {0.8, 2}}, "x"});
  CHECK(r.layers[0].species == 2);
  CHECK(r.layers[1].length == 0.2);
}

TEST_CASE("cell validation") {
  CHECK_NOTHROW(validate_cell(fx::cell_a()));
  CHECK(throws_kind(ErrorKind::InvalidInput, [] { validate_cell({{{0.5, 1}, {0.4, 2}}, "x"}); }));
  CHECK(throws_kind(ErrorKind::InvalidInput, [] { validate_cell({{{0.5, 1}, {0.5, 3}}, "x"}); }));
  CHECK(throws_kind(ErrorKind::InvalidInput, [] { validate_cell({{{1.5, 1}, {-0.5, 2}}, "x"}); }));
  CHECK(throws_kind(ErrorKind::InvalidInput, [] { validate_cell({{}, "x"}); }));
}

TEST_CASE("media poles") {
  auto p = fx::base_media().poles();
  REQUIRE(p.size() == 2);
  CHECK(p[0] == 1.0);
  CHECK(p[1] == doctest::Approx(std::sqrt(2.0)));
  CHECK(fx::constant_media(2.0).poles().empty());
  CHECK_FALSE(fx::base_media().perturbed());
  CHECK(with_perturbation(fx::base_media(), PerturbationKind::inverse_sq_decreasing, 1e-3).perturbed());
}

TEST_CASE("sigma perturbation") {
  const Structure s = fx::base();
  CHECK(sigma_upper_bound(s) == doctest::Approx(0.15));

  Structure z = apply_sigma_perturbation(s, 0.0);
  check_layers(z.cell_a, {0.1, 0.25, 0.3, 0.25, 0.1});
  check_layers(z.cell_b, {0.15, 0.25, 0.2, 0.25, 0.15});

  Structure p = apply_sigma_perturbation(s, 0.05);
  check_layers(p.cell_a, {0.1, 0.25, 0.25, 0.25, 0.15});
  check_layers(p.cell_b, {0.1, 0.25, 0.25, 0.25, 0.15});
  CHECK_FALSE(is_mirror_symmetric(p.cell_a));

  // B loses its first layer at the bound
  Structure m = apply_sigma_perturbation(s, 0.15);
  check_layers(m.cell_a, {0.1, 0.25, 0.15, 0.25, 0.25});
  check_layers(m.cell_b, {0.25, 0.35, 0.25, 0.15});
  CHECK(m.cell_b.layers.front().species == 2);

  CHECK(throws_kind(ErrorKind::SigmaOutOfRange, [&] { apply_sigma_perturbation(s, 0.2); }));
  CHECK(throws_kind(ErrorKind::SigmaOutOfRange, [&] { apply_sigma_perturbation(s, -0.01); }));
}
