#pragma once

// Shared fixtures and an independent ODE integrator used as a reference in several suites.

#include <array>
#include <cmath>
#include <complex>

#include "dtopo/materials.hpp"
#include "dtopo/xfer.hpp"

namespace fx {

inline constexpr double kPi = 3.14159265358979323846;

inline dtopo::UnitCell cell_a() { return {{{0.1, 1}, {0.25, 2}, {0.3, 1}, {0.25, 2}, {0.1, 1}}, "A"}; }
inline dtopo::UnitCell cell_b() { return {{{0.15, 1}, {0.25, 2}, {0.2, 1}, {0.25, 2}, {0.15, 1}}, "B"}; }

// Main fixture: Lorentz species, pole of species 1 at ω = 1.
inline dtopo::Media base_media() {
  dtopo::Media m;
  m.eps1 = {1.0, 2.0, 1.0};
  m.eps2 = {1.0, 1.0, 0.5};
  return m;
}

inline dtopo::Structure base() { return {cell_a(), cell_b(), base_media()}; }

// Same cells with the poles moved far above the first gap.
inline dtopo::Structure sweep_fixture() {
  dtopo::Structure s = base();
  s.media.eps1.beta = 0.05;
  s.media.eps2.beta = 0.025;
  return s;
}

inline constexpr double kBaseLo = 0.0, kBaseHi = 0.995;
inline constexpr double kSweepLo = 0.05, kSweepHi = 3.5;

inline dtopo::Media constant_media(double eps) {
  dtopo::Media m;
  m.eps1 = {eps, 0.0, 0.0};
  m.eps2 = {eps, 0.0, 0.0};
  return m;
}

// Fundamental matrix of (u, q = u'/ε) over one cell by classical RK4 with `steps` per layer,
// returned in the library's (u, u') coordinates of the first layer.
inline dtopo::TransferMatrix rk4_cell(const dtopo::UnitCell& cell, const dtopo::Media& media, double omega,
                                      int steps = 4000) {
  using V = std::array<double, 2>;
  auto run = [&](V y) {
    for (const auto& l : cell.layers) {
      const double e = media.eps(l.species, omega);
      const double k2 = media.mu0 * omega * omega;
      auto f = [&](const V& s) { return V{e * s[1], -k2 * s[0]}; };
      const double h = l.length / steps;
      for (int i = 0; i < steps; ++i) {
        V a = f(y);
        V b = f({y[0] + 0.5 * h * a[0], y[1] + 0.5 * h * a[1]});
        V c = f({y[0] + 0.5 * h * b[0], y[1] + 0.5 * h * b[1]});
        V d = f({y[0] + h * c[0], y[1] + h * c[1]});
        y[0] += h / 6 * (a[0] + 2 * b[0] + 2 * c[0] + d[0]);
        y[1] += h / 6 * (a[1] + 2 * b[1] + 2 * c[1] + d[1]);
      }
    }
    return y;
  };
  const double e0 = media.eps(cell.layers.front().species, omega);
  V c1 = run({1.0, 0.0});       // u = 1, u' = 0
  V c2 = run({0.0, 1.0 / e0});  // u = 0, u' = 1
  return {c1[0], c2[0], e0 * c1[1], e0 * c2[1]};
}

}  // namespace fx
