#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "vpme/density.hpp"
#include "vpme/grid.hpp"

namespace vpme {

/// N equally weighted particles (X_i, V_i) on T^d x R^d.
struct ParticleEnsemble {
  int dim = 2;
  std::vector<Vec> positions;
  std::vector<Vec> velocities;
  double epsilon = 1.0;
  double r = 0.0;
  double time = 0.0;

  std::size_t size() const noexcept { return positions.size(); }
  /// Wraps every position into [0,1)^d.
  void wrap_positions() noexcept;
  /// Largest particle speed.
  double max_speed() const noexcept;
  /// Checks the structural invariants; throws InvalidArgument on failure.
  void validate() const;
};

/// N independent draws from f0; bit-identical for a given seed.
ParticleEnsemble sample_iid(const DensitySpec& f0, std::size_t n, std::uint64_t seed);

/// Deterministic low-discrepancy placement: a tensor lattice in the x1 quantile
/// and the remaining position axes, velocities from a Halton sequence over a
/// scrambled particle index, each mapped through the marginal quantiles.
ParticleEnsemble quiet_start(const DensitySpec& f0, std::size_t n);

/// Balanced factorization of n into `axes` lattice counts (largest first).
std::vector<std::size_t> lattice_counts(std::size_t n, int axes);

// Binary layout, little-endian:
//   char[4] "VPME", uint32 d, uint64 N, float64 epsilon, float64 r, float64 time,
//   float64 positions[N][d], float64 velocities[N][d]
void write_ensemble_binary(const std::filesystem::path& path, const ParticleEnsemble& e);
ParticleEnsemble read_ensemble_binary(const std::filesystem::path& path);
/// CSV header `x1,..,xd,v1,..,vd`.
void write_ensemble_csv(const std::filesystem::path& path, const ParticleEnsemble& e);

/// Deterministic 64-bit generator used for all sampling (splitmix64 seeding into xoshiro256**).
class Rng {
public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next() noexcept;
  /// Uniform in (0,1).
  double uniform() noexcept { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

private:
  std::uint64_t s_[4];
};

}  // namespace vpme
