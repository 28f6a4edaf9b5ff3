#pragma once

#include <optional>
#include <vector>

#include "bubbelator/model.hpp"

namespace bubbelator {

/// Equilibrium with monomer density z. Every equilibrium has equal fluxes
/// J_1 = ... = J_N = J and densities of the form z(1-alpha) + z^l alpha.
struct EquilibriumProfile {
  double z = 0.0;
  /// Empty at z == 1, where the (z^l, 1) representation degenerates.
  std::optional<double> alpha;
  std::vector<double> densities;
  double mass = 0.0;
  double flux = 0.0;
};

/// Throws DomainError for z <= 0 or non-finite z.
EquilibriumProfile general_equilibrium(const ModelParams& p, double z);

/// Total mass of the equilibrium with monomer density z.
double mass_of_equilibrium(const ModelParams& p, double z);

/// Sum_{l=1}^M l z^l.
double mu_M(int M, double z);

/// Inverts mass_of_equilibrium. Throws NotFoundError if the target cannot be
/// bracketed or the mass map turns out to be non-monotone on the bracket.
double find_z_for_mass(const ModelParams& p, double target_mass);

}  // namespace bubbelator
