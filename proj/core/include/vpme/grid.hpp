#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace vpme {

/// Point or vector in up to three dimensions; unused trailing components are 0.
using Vec = std::array<double, 3>;

/// Uniform periodic grid on the unit box [0,1)^d.
class TorusGrid {
public:
  TorusGrid() = default;
  /// Throws InvalidArgument unless d in {2,3} and n is a power of two >= 16.
  TorusGrid(int dim, int n);

  int dim() const noexcept { return dim_; }
  int n() const noexcept { return n_; }
  double h() const noexcept { return 1.0 / n_; }
  double cell_volume() const noexcept;
  std::size_t cells() const noexcept { return cells_; }

  /// Row-major flat index with periodic wrapping of every coordinate.
  std::size_t index(int i, int j, int k = 0) const noexcept {
    i = wrap(i);
    j = wrap(j);
    if (dim_ == 2) return static_cast<std::size_t>(i) * n_ + j;
    k = wrap(k);
    return (static_cast<std::size_t>(i) * n_ + j) * n_ + k;
  }
  /// Integer coordinates of a flat index.
  std::array<int, 3> coords(std::size_t flat) const noexcept;
  /// Physical position of a node.
  Vec node(std::size_t flat) const noexcept;

  int wrap(int i) const noexcept {
    i %= n_;
    return i < 0 ? i + n_ : i;
  }

  bool operator==(const TorusGrid& o) const noexcept { return dim_ == o.dim_ && n_ == o.n_; }

private:
  int dim_ = 0;
  int n_ = 0;
  std::size_t cells_ = 0;
};

/// Wraps x into [0,1).
double wrap_unit(double x) noexcept;
/// Minimal-image signed displacement in (-1/2, 1/2].
double min_image(double dx) noexcept;
/// Squared minimal-image distance on the torus over the first d axes.
double torus_dist2(const Vec& a, const Vec& b, int d) noexcept;

/// Gridded real function, one value per cell node.
struct ScalarField {
  TorusGrid grid;
  std::vector<double> values;
  bool mean_zero = false;

  ScalarField() = default;
  explicit ScalarField(const TorusGrid& g, double fill = 0.0, bool zero_mean = false)
      : grid(g), values(g.cells(), fill), mean_zero(zero_mean) {}

  double mean() const noexcept;
  double max_abs() const noexcept;
  bool all_finite() const noexcept;
};

/// Gridded vector field with one array per component.
struct VectorField {
  TorusGrid grid;
  std::vector<std::vector<double>> components;

  VectorField() = default;
  explicit VectorField(const TorusGrid& g)
      : grid(g), components(static_cast<std::size_t>(g.dim()), std::vector<double>(g.cells(), 0.0)) {}

  Vec at(std::size_t flat) const noexcept;
  double max_abs() const noexcept;
  bool all_finite() const noexcept;
};

/// Samples f at every node.
template <class F>
ScalarField sample(const TorusGrid& g, F&& f) {
  ScalarField out(g);
  for (std::size_t c = 0; c < g.cells(); ++c) out.values[c] = f(g.node(c));
  return out;
}

/// Max-norm of a - b; grids must agree.
double max_abs_diff(std::span<const double> a, std::span<const double> b);

}  // namespace vpme
