#pragma once

#include <cstdint>
#include <string>

#include "vpme/grid.hpp"

namespace vpme {

/// Named analytic families of initial phase-space densities f0(x, v) = rho0(x) M(v).
enum class DensityFamily {
  uniform_maxwellian,    ///< rho0 = 1, M truncated Gaussian
  perturbed_maxwellian,  ///< rho0 = 1 + alpha cos(2 pi m x1), M truncated Gaussian
  cold_uniform,          ///< rho0 = 1, M = delta_0
};

DensityFamily parse_density_family(const std::string& name);
std::string to_string(DensityFamily f);

/// Each velocity component is a Gaussian of standard deviation `thermal_speed`
/// truncated to |v_k| <= support_radius / sqrt(d), so f0 vanishes for |v| > R0.
struct DensitySpec {
  DensityFamily family = DensityFamily::uniform_maxwellian;
  int dim = 2;
  double thermal_speed = 1.0;
  double support_radius = 5.0;  ///< R0
  double alpha = 0.0;
  int mode = 1;

  /// Throws InvalidArgument for inconsistent parameters.
  void validate() const;

  double spatial_density(const Vec& x) const noexcept;
  /// Velocity density (not defined for the cold family).
  double velocity_density(const Vec& v) const noexcept;

  /// Per-component truncation bound R0 / sqrt(d).
  double component_bound() const noexcept;
  /// Per-component variance of the truncated Gaussian.
  double component_variance() const noexcept;

  /// Inverse marginal CDF of x1 and of one velocity component.
  double x1_quantile(double u) const;
  double velocity_quantile(double u) const;

  /// Density of a single velocity component.
  double component_density(double v) const noexcept;

  /// Phase-space mass by panelled Gauss-Legendre quadrature.
  double quadrature_mass() const;
};

/// Canonical key = value text used for hashing and metadata.
std::string canonical_string(const DensitySpec& f);

}  // namespace vpme
