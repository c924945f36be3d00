#pragma once

#include <optional>
#include <vector>

#include "vpme/ensemble.hpp"
#include "vpme/grid.hpp"
#include "vpme/mollifier.hpp"
#include "vpme/poisson.hpp"

namespace vpme {

/// How particles talk to the grid.
enum class DepositionScheme {
  /// Each particle deposits chi_r(x - X_i) sampled at the nodes (renormalized
  /// per particle to unit mass); the force is the exact gradient of the
  /// resulting discrete field energy, so the semi-discrete dynamics is
  /// Hamiltonian in the particle coordinates.
  kernel,
  /// Cloud-in-cell binning, spectral convolution with chi_r, spectral E = -grad U,
  /// a second convolution, and cloud-in-cell interpolation back to the particles.
  cic_spectral,
};

DepositionScheme parse_deposition_scheme(const std::string& name);
std::string to_string(DepositionScheme s);

/// Grid density chi_r * mu^N with unit mass. Rejects m.radius() < 2h.
ScalarField deposit_mollified_density(const ParticleEnsemble& e, const TorusGrid& grid, const MollifierSpec& m,
                                      DepositionScheme scheme = DepositionScheme::kernel);

/// Interpolates -chi_r * grad(phi) to the particles for a given grid potential phi
/// using the chosen scheme's force path.
std::vector<Vec> potential_forces(const ParticleEnsemble& e, const ScalarField& phi, const MollifierSpec& m,
                                  DepositionScheme scheme = DepositionScheme::kernel);

/// Evaluates particle accelerations dV_i/dt = -chi_r * grad U (X_i), keeping the
/// last potential as the warm start for the next call.
class ForceEvaluator {
public:
  ForceEvaluator(const TorusGrid& grid, MollifierSpec m, double epsilon,
                 DepositionScheme scheme = DepositionScheme::kernel, NewtonOptions newton = {});

  std::vector<Vec> operator()(const ParticleEnsemble& e);

  const TorusGrid& grid() const noexcept { return grid_; }
  const MollifierSpec& mollifier() const noexcept { return m_; }
  double epsilon() const noexcept { return epsilon_; }
  DepositionScheme scheme() const noexcept { return scheme_; }

  /// Density and potential of the most recent evaluation.
  const ScalarField& density() const noexcept { return rho_; }
  const ScalarField& potential() const noexcept { return u_; }
  double last_residual() const noexcept { return residual_; }
  int last_newton_iterations() const noexcept { return iters_; }

private:
  TorusGrid grid_;
  MollifierSpec m_;
  double epsilon_;
  DepositionScheme scheme_;
  NewtonOptions newton_;
  ScalarField rho_;
  ScalarField u_;
  bool have_u_ = false;
  double residual_ = 0.0;
  int iters_ = 0;
};

/// One-shot force evaluation (cold start).
std::vector<Vec> compute_forces(const ParticleEnsemble& e, const TorusGrid& grid, const MollifierSpec& m,
                                DepositionScheme scheme = DepositionScheme::kernel);

/// Forces of the linear, density-sourced part only: Ubar with eps^2 Lap Ubar = 1 - rho.
std::vector<Vec> linearized_pair_forces(const ParticleEnsemble& e, const TorusGrid& grid, const MollifierSpec& m,
                                        DepositionScheme scheme = DepositionScheme::kernel);

/// Kick-drift-kick integrator that reuses the closing force of each step.
class LeapfrogIntegrator {
public:
  LeapfrogIntegrator(ParticleEnsemble initial, ForceEvaluator forces);

  /// Advances by dt > 0; the ensemble is untouched if the field solve throws.
  void step(double dt);

  const ParticleEnsemble& state() const noexcept { return state_; }
  const std::vector<Vec>& forces() const noexcept { return accel_; }
  const ForceEvaluator& evaluator() const noexcept { return eval_; }
  /// Replaces the state (forces are recomputed).
  void reset(ParticleEnsemble e);

private:
  ParticleEnsemble state_;
  ForceEvaluator eval_;
  std::vector<Vec> accel_;
};

/// Single kick(dt/2) - drift(dt) - kick(dt/2) step from scratch.
ParticleEnsemble leapfrog_step(const ParticleEnsemble& e, double dt, const TorusGrid& grid, const MollifierSpec& m,
                               DepositionScheme scheme = DepositionScheme::kernel);

}  // namespace vpme
