#pragma once

#include <vector>

#include "vpme/grid.hpp"

namespace vpme {

/// Radial C^2 bump chi(s) = c_d (1-s)^4 (1+4s) on s <= 1, scaled to radius r.
///
/// `samples` holds chi_r at the minimal-image offset of every node,
/// renormalized so that h^d * sum = 1; `fourier` holds the matching discrete
/// transform (real, since the samples are even), with fourier[0] == 1.
class MollifierSpec {
public:
  MollifierSpec() = default;
  MollifierSpec(double r, const TorusGrid& grid);

  double radius() const noexcept { return r_; }
  const TorusGrid& grid() const noexcept { return grid_; }
  const ScalarField& samples() const noexcept { return samples_; }
  const std::vector<double>& fourier() const noexcept { return fourier_; }

  /// Continuous chi_r at displacement x (unit mass on R^d).
  double value(const Vec& x) const noexcept;
  /// Gradient of the continuous chi_r at displacement x.
  Vec gradient(const Vec& x) const noexcept;

  /// Unit-mass constant c_d of the profile in dimension d.
  static double normalization(int d);

private:
  double r_ = 0.0;
  TorusGrid grid_;
  double c_ = 0.0;
  ScalarField samples_;
  std::vector<double> fourier_;
};

/// Rejects r < 2h (under-resolved) and r > 1/4.
MollifierSpec make_mollifier(double r, const TorusGrid& grid);

/// chi_r * f by spectral convolution with the sampled kernel; preserves the mean.
ScalarField mollify_field(const ScalarField& f, const MollifierSpec& m);
VectorField mollify_field(const VectorField& f, const MollifierSpec& m);

/// Fraction of the profile's mass within radius s * r (s in [0,1]).
double mollifier_radial_cdf(double s, int dim);

/// Equal-weight discretization of chi_r: `radial` shells at the mass quantiles
/// times `angular` directions per shell. The offsets average to zero in d=2.
std::vector<Vec> equal_mass_offsets(double r, int dim, std::size_t radial, std::size_t angular);

/// Grid values of chi_r * K * chi_r with K = grad G the periodic Coulomb kernel.
VectorField regularized_pair_force(const MollifierSpec& m);

}  // namespace vpme
