#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vpme/density.hpp"
#include "vpme/energy.hpp"
#include "vpme/ensemble.hpp"
#include "vpme/pic.hpp"
#include "vpme/poisson.hpp"

namespace vpme {

enum class InitMode { iid, quiet };

InitMode parse_init_mode(const std::string& name);
std::string to_string(InitMode m);

struct SimulationConfig {
  DensitySpec f0;
  std::size_t n_particles = 1024;
  double epsilon = 1.0;
  double r = 0.1;
  /// Time step; <= 0 selects min(1e-3, 0.1 h / max|V|).
  double dt = 1e-3;
  double t_end = 1.0;
  double snapshot_interval = 0.1;
  int grid_n = 64;
  std::uint64_t seed = 1;
  InitMode init = InitMode::iid;
  bool store_ensembles = false;
  DepositionScheme scheme = DepositionScheme::kernel;
  NewtonOptions newton;
  /// Failed steps are retried as two half steps, at most this many levels deep.
  int max_halvings = 3;

  void validate() const;
  std::string canonical() const;
  std::uint64_t hash() const;
};

struct Snapshot {
  double time = 0.0;
  EnergyReport energy;
  double support_radius = 0.0;  ///< max particle speed R_t
  double max_density = 0.0;     ///< max of the deposited density
  int newton_iters = 0;
  std::optional<ParticleEnsemble> ensemble;
};

struct RunRecord {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  double dt = 0.0;
  std::size_t steps = 0;
  bool complete = true;
  std::string error;
  /// max over all steps of |E(t) - E(0)| / |E(0)|
  double max_relative_energy_drift = 0.0;
  std::vector<Snapshot> snapshots;
};

/// FNV-1a 64-bit hash of a string.
std::uint64_t fnv1a64(const std::string& s) noexcept;

/// Initial ensemble prescribed by the config (sampled or quiet start).
ParticleEnsemble initial_ensemble(const SimulationConfig& cfg);

/// Runs the configured simulation; a failed step ends the run with
/// `complete = false` and the snapshots recorded so far.
RunRecord simulate(const SimulationConfig& cfg);
/// Same, from explicit initial data.
RunRecord simulate(const SimulationConfig& cfg, ParticleEnsemble initial);

}  // namespace vpme
