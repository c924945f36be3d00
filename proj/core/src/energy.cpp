#include "vpme/energy.hpp"

#include <cmath>

#include "vpme/error.hpp"
#include "vpme/spectral.hpp"

namespace vpme {

double kinetic_energy(const ParticleEnsemble& e) noexcept {
  double s = 0.0;
  for (const auto& v : e.velocities) s += v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
  return e.size() ? 0.5 * s / static_cast<double>(e.size()) : 0.0;
}

EnergyReport energy_from_potential(const ParticleEnsemble& e, const ScalarField& u, double epsilon) {
  EnergyReport r;
  r.epsilon = epsilon;
  r.kinetic = kinetic_energy(e);
  const auto& sp = Spectral::for_grid(u.grid);
  const auto lap = sp.laplacian(u.values);
  const double vol = u.grid.cell_volume();
  double grad2 = 0.0;
  double thermal = 0.0;
  for (std::size_t i = 0; i < lap.size(); ++i) {
    grad2 -= u.values[i] * lap[i];
    thermal += u.values[i] * std::exp(u.values[i]);
  }
  // int |grad U|^2 = -int U Lap U, consistent with the spectral Laplacian of the solver
  r.field = 0.5 * epsilon * epsilon * grad2 * vol;
  r.thermal = thermal * vol;
  r.total = r.kinetic + r.field + r.thermal;
  return r;
}

EnergyReport particle_energy(const ParticleEnsemble& e, const FieldSolution& sol) {
  if (std::abs(sol.time - e.time) > 1e-12) throw InvalidArgument("particle_energy: stale field (time mismatch)");
  return energy_from_potential(e, sol.u_total, sol.epsilon);
}

}  // namespace vpme
