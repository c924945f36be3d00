#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "vpme/grid.hpp"

namespace vpme {

using Complex = std::complex<double>;

/// Real-to-complex Fourier transforms and wavenumber tables for one grid.
///
/// Instances are shared per (d, n) through `for_grid` and are safe to use
/// from several threads at once; only plan creation is serialized.
class Spectral {
public:
  static const Spectral& for_grid(const TorusGrid& grid);

  const TorusGrid& grid() const noexcept { return grid_; }
  /// Number of stored half-spectrum coefficients.
  std::size_t modes() const noexcept { return modes_; }

  /// Unnormalized forward transform.
  std::vector<Complex> forward(std::span<const double> values) const;
  /// Inverse transform including the 1/n^d normalization.
  std::vector<double> inverse(std::span<const Complex> coeffs) const;

  /// Signed integer wavenumber of mode m along axis a.
  int wavenumber(std::size_t m, int axis) const noexcept { return kvec_[m * 3 + static_cast<std::size_t>(axis)]; }
  /// |k|^2 for mode m.
  double k2(std::size_t m) const noexcept { return k2_[m]; }
  /// True when the component along `axis` sits on the Nyquist plane.
  bool nyquist(std::size_t m, int axis) const noexcept;
  /// Multiplicity of mode m in the full spectrum (1 or 2 for the half-spectrum layout).
  double weight(std::size_t m) const noexcept { return weight_[m]; }

  /// Spectral Laplacian of real grid values.
  std::vector<double> laplacian(std::span<const double> values) const;
  /// Spectral derivative along `axis` with the Nyquist mode dropped.
  std::vector<double> derivative(std::span<const double> values, int axis) const;

  ~Spectral();
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

private:
  explicit Spectral(const TorusGrid& grid);

  TorusGrid grid_;
  std::size_t modes_ = 0;
  std::vector<int> kvec_;
  std::vector<double> k2_;
  std::vector<double> weight_;
  void* plan_fwd_ = nullptr;
  void* plan_inv_ = nullptr;
};

}  // namespace vpme
