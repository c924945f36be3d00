#include "vpme/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vpme/error.hpp"

namespace vpme {

TorusGrid::TorusGrid(int dim, int n) : dim_(dim), n_(n) {
  if (dim != 2 && dim != 3) throw InvalidArgument("TorusGrid: dimension must be 2 or 3");
  if (n < 16 || (n & (n - 1)) != 0) throw InvalidArgument("TorusGrid: n must be a power of two >= 16");
  cells_ = 1;
  for (int a = 0; a < dim; ++a) cells_ *= static_cast<std::size_t>(n);
}

double TorusGrid::cell_volume() const noexcept { return std::pow(h(), dim_); }

std::array<int, 3> TorusGrid::coords(std::size_t flat) const noexcept {
  std::array<int, 3> c{0, 0, 0};
  const auto nn = static_cast<std::size_t>(n_);
  for (int a = dim_ - 1; a >= 0; --a) {
    c[static_cast<std::size_t>(a)] = static_cast<int>(flat % nn);
    flat /= nn;
  }
  return c;
}

Vec TorusGrid::node(std::size_t flat) const noexcept {
  const auto c = coords(flat);
  return {c[0] * h(), c[1] * h(), dim_ == 3 ? c[2] * h() : 0.0};
}

double wrap_unit(double x) noexcept {
  x -= std::floor(x);
  // floor can round x up to exactly 1 for tiny negative inputs
  return x >= 1.0 ? 0.0 : x;
}

double min_image(double dx) noexcept { return dx - std::round(dx); }

double torus_dist2(const Vec& a, const Vec& b, int d) noexcept {
  double s = 0.0;
  for (int k = 0; k < d; ++k) {
    double dx = std::abs(a[static_cast<std::size_t>(k)] - b[static_cast<std::size_t>(k)]);
    dx = std::min(dx, 1.0 - dx);
    s += dx * dx;
  }
  return s;
}

double ScalarField::mean() const noexcept {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double ScalarField::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

bool ScalarField::all_finite() const noexcept {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

Vec VectorField::at(std::size_t flat) const noexcept {
  Vec v{0.0, 0.0, 0.0};
  for (std::size_t a = 0; a < components.size(); ++a) v[a] = components[a][flat];
  return v;
}

double VectorField::max_abs() const noexcept {
  double m = 0.0;
  for (const auto& c : components)
    for (double v : c) m = std::max(m, std::abs(v));
  return m;
}

bool VectorField::all_finite() const noexcept {
  return std::all_of(components.begin(), components.end(), [](const auto& c) {
    return std::all_of(c.begin(), c.end(), [](double v) { return std::isfinite(v); });
  });
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("max_abs_diff: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace vpme
