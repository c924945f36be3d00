#pragma once

#include "vpme/ensemble.hpp"
#include "vpme/grid.hpp"
#include "vpme/poisson.hpp"

namespace vpme {

/// Regularized energy (1/2N) sum |V_i|^2 + (eps^2/2) int |grad U|^2 + int U e^U.
struct EnergyReport {
  double kinetic = 0.0;
  double field = 0.0;
  double thermal = 0.0;
  double total = 0.0;
  double epsilon = 1.0;
};

/// Energy from a field solution computed at the ensemble's time; a time
/// mismatch is rejected as a stale field.
EnergyReport particle_energy(const ParticleEnsemble& e, const FieldSolution& sol);

/// Energy from a bare potential U at the ensemble's positions.
EnergyReport energy_from_potential(const ParticleEnsemble& e, const ScalarField& u, double epsilon);

double kinetic_energy(const ParticleEnsemble& e) noexcept;

}  // namespace vpme
