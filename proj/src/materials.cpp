#include "dtopo/materials.hpp"

#include <algorithm>
#include <cmath>

#include "dtopo/errors.hpp"

namespace dtopo {

const char* to_string(PerturbationKind k) {
  switch (k) {
    case PerturbationKind::none: return "none";
    case PerturbationKind::inverse_sq_decreasing: return "inverse_sq_decreasing";
    case PerturbationKind::inverse_sq_increasing: return "inverse_sq_increasing";
  }
  return "none";
}

PerturbationKind perturbation_from_string(const std::string& s) {
  if (s == "none") return PerturbationKind::none;
  if (s == "inverse_sq_decreasing") return PerturbationKind::inverse_sq_decreasing;
  if (s == "inverse_sq_increasing") return PerturbationKind::inverse_sq_increasing;
  throw Error(ErrorKind::InvalidInput, "unknown perturbation kind '" + s + "'");
}

std::optional<double> PermittivityModel::pole() const {
  if (beta > 0.0) return 1.0 / std::sqrt(beta);
  return std::nullopt;
}

namespace {

void check_domain(const PermittivityModel& m, double omega, double eta_pole) {
  double q = 1.0 - m.beta * omega * omega;
  if (std::abs(q) <= eta_pole)
    throw Error(ErrorKind::PoleProximity,
                "omega=" + std::to_string(omega) + " within eta_pole of the permittivity pole");
  if (m.pert_kind != PerturbationKind::none && std::abs(omega) <= eta_pole)
    throw Error(ErrorKind::PoleProximity, "perturbation term 1/omega^2 singular at omega=0");
}

double pert_sign(PerturbationKind k) {
  switch (k) {
    case PerturbationKind::inverse_sq_decreasing: return -1.0;
    case PerturbationKind::inverse_sq_increasing: return 1.0;
    default: return 0.0;
  }
}

}  // namespace

double eval_permittivity(const PermittivityModel& m, double omega, double eta_pole) {
  check_domain(m, omega, eta_pole);
  double e = m.eps0 + m.alpha / (1.0 - m.beta * omega * omega);
  if (m.pert_kind != PerturbationKind::none)
    e += m.pert_delta * pert_sign(m.pert_kind) / (omega * omega);
  return e;
}

double permittivity_derivative(const PermittivityModel& m, double omega, double eta_pole) {
  check_domain(m, omega, eta_pole);
  double q = 1.0 - m.beta * omega * omega;
  double d = 2.0 * m.alpha * m.beta * omega / (q * q);
  if (m.pert_kind != PerturbationKind::none)
    d += m.pert_delta * pert_sign(m.pert_kind) * (-2.0) / (omega * omega * omega);
  return d;
}

void validate_cell(const UnitCell& cell) {
  if (cell.layers.empty()) throw Error(ErrorKind::InvalidInput, "cell " + cell.label + " has no layers");
  double total = 0.0;
  for (const auto& l : cell.layers) {
    if (!(l.length > 0.0))
      throw Error(ErrorKind::InvalidInput, "cell " + cell.label + ": layer length must be > 0");
    if (l.species != 1 && l.species != 2)
      throw Error(ErrorKind::InvalidInput, "cell " + cell.label + ": species must be 1 or 2");
    total += l.length;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw Error(ErrorKind::InvalidInput, "cell " + cell.label + ": layer lengths sum to " +
                                             std::to_string(total) + ", expected 1");
}

bool is_mirror_symmetric(const UnitCell& cell, double tol) {
  const auto& L = cell.layers;
  for (std::size_t i = 0, j = L.size(); i < L.size(); ++i) {
    --j;
    if (L[i].species != L[j].species) return false;
    if (std::abs(L[i].length - L[j].length) > tol) return false;
  }
  return true;
}

UnitCell reversed(const UnitCell& cell) {
  UnitCell r = cell;
  std::reverse(r.layers.begin(), r.layers.end());
  return r;
}

std::vector<double> Media::poles() const {
  std::vector<double> p;
  for (const auto* m : {&eps1, &eps2})
    if (auto w = m->pole()) p.push_back(*w);
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  return p;
}

Media with_perturbation(const Media& media, PerturbationKind kind, double delta) {
  Media m = media;
  for (auto* e : {&m.eps1, &m.eps2}) {
    e->pert_kind = kind;
    e->pert_delta = delta;
  }
  return m;
}

namespace {

std::vector<std::size_t> species1_positions(const UnitCell& c) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < c.layers.size(); ++i)
    if (c.layers[i].species == 1) idx.push_back(i);
  return idx;
}

// 0-based position of the "middle" species-1 layer, ⌊(K+2)/2⌋ in 1-based counting.
std::size_t middle_of(std::size_t k) { return (k + 2) / 2 - 1; }

void drop_empty(UnitCell& c) {
  std::erase_if(c.layers, [](const Layer& l) { return l.length <= 1e-14; });
}

}  // namespace

double sigma_upper_bound(const Structure& s) {
  auto ia = species1_positions(s.cell_a);
  auto ib = species1_positions(s.cell_b);
  if (ia.size() < 2 || ib.size() < 2)
    throw Error(ErrorKind::InvalidInput, "sigma perturbation needs at least two species-1 layers per cell");
  double shrink_a = s.cell_a.layers[ia[middle_of(ia.size())]].length;
  double shrink_b = s.cell_b.layers[ib.front()].length;
  return std::min(shrink_a, shrink_b);
}

Structure apply_sigma_perturbation(const Structure& s, double sigma) {
  double smax = sigma_upper_bound(s);
  if (!(sigma >= 0.0) || sigma > smax * (1.0 + 1e-12))
    throw Error(ErrorKind::SigmaOutOfRange,
                "sigma=" + std::to_string(sigma) + " outside [0, " + std::to_string(smax) + "]");
  Structure out = s;
  if (sigma == 0.0) return out;
  auto ia = species1_positions(s.cell_a);
  auto ib = species1_positions(s.cell_b);
  out.cell_a.layers[ia.back()].length += sigma;
  out.cell_a.layers[ia[middle_of(ia.size())]].length -= sigma;
  out.cell_b.layers[ib.front()].length -= sigma;
  out.cell_b.layers[ib[middle_of(ib.size())]].length += sigma;
  drop_empty(out.cell_a);
  drop_empty(out.cell_b);
  return out;
}

}  // namespace dtopo
