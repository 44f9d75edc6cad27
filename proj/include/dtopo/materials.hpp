#pragma once

#include <optional>
#include <string>
#include <vector>

namespace dtopo {

inline constexpr double kEtaPole = 1e-6;

// f(ω) added to the Lorentz term: none, −1/ω² (inverse_sq_decreasing), +1/ω² (inverse_sq_increasing).
enum class PerturbationKind { none, inverse_sq_decreasing, inverse_sq_increasing };

const char* to_string(PerturbationKind k);
PerturbationKind perturbation_from_string(const std::string& s);

// ε(ω) = eps0 + alpha / (1 - beta ω²) + pert_delta · f(ω)
struct PermittivityModel {
  double eps0 = 1.0;
  double alpha = 0.0;
  double beta = 0.0;
  PerturbationKind pert_kind = PerturbationKind::none;
  double pert_delta = 0.0;

  std::optional<double> pole() const;
};

double eval_permittivity(const PermittivityModel& m, double omega, double eta_pole = kEtaPole);
double permittivity_derivative(const PermittivityModel& m, double omega, double eta_pole = kEtaPole);

struct Layer {
  double length = 0.0;
  int species = 1;  // 1 or 2
};

struct UnitCell {
  std::vector<Layer> layers;
  std::string label;
};

// Throws InvalidInput unless lengths are positive, species in {1,2} and the total is 1.
void validate_cell(const UnitCell& cell);
bool is_mirror_symmetric(const UnitCell& cell, double tol = 1e-12);
UnitCell reversed(const UnitCell& cell);

// The two species shared by both cells, plus μ₀.
struct Media {
  PermittivityModel eps1;
  PermittivityModel eps2;
  double mu0 = 1.0;
  double eta_pole = kEtaPole;

  const PermittivityModel& model(int species) const { return species == 1 ? eps1 : eps2; }
  double eps(int species, double omega) const { return eval_permittivity(model(species), omega, eta_pole); }
  // Sorted pole frequencies of both species (no duplicates).
  std::vector<double> poles() const;
  bool perturbed() const {
    return eps1.pert_kind != PerturbationKind::none || eps2.pert_kind != PerturbationKind::none;
  }
};

// Same δ and f on both species.
Media with_perturbation(const Media& media, PerturbationKind kind, double delta);

// cell_a fills x < 0, cell_b fills x > 0, interface at x = 0.
struct Structure {
  UnitCell cell_a;
  UnitCell cell_b;
  Media media;
};

double sigma_upper_bound(const Structure& s);
// A: last species-1 layer grows by σ, middle one shrinks. B: first species-1 layer shrinks,
// middle one grows. Layers that reach zero length are removed.
Structure apply_sigma_perturbation(const Structure& s, double sigma);

}  // namespace dtopo
