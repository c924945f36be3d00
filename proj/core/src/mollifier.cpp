#include "vpme/mollifier.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "vpme/error.hpp"
#include "vpme/spectral.hpp"

namespace vpme {

double MollifierSpec::normalization(int d) {
  // Integral of s^{d-1}(1-s)^4(1+4s) over [0,1] is 1/14 (d=2) and 1/42 (d=3).
  return d == 2 ? 14.0 / (2.0 * std::numbers::pi) : 42.0 / (4.0 * std::numbers::pi);
}

MollifierSpec::MollifierSpec(double r, const TorusGrid& grid) : r_(r), grid_(grid), c_(normalization(grid.dim())) {
  samples_ = ScalarField(grid);
  const int d = grid.dim();
  double sum = 0.0;
  for (std::size_t c = 0; c < grid.cells(); ++c) {
    const auto ijk = grid.coords(c);
    Vec x{0.0, 0.0, 0.0};
    for (int a = 0; a < d; ++a) {
      int i = ijk[static_cast<std::size_t>(a)];
      if (i > grid.n() / 2) i -= grid.n();
      x[static_cast<std::size_t>(a)] = i * grid.h();
    }
    samples_.values[c] = value(x);
    sum += samples_.values[c];
  }
  const double scale = 1.0 / (sum * grid.cell_volume());
  for (double& v : samples_.values) v *= scale;

  const auto& sp = Spectral::for_grid(grid);
  const auto coeffs = sp.forward(samples_.values);
  fourier_.resize(coeffs.size());
  for (std::size_t m = 0; m < coeffs.size(); ++m) fourier_[m] = coeffs[m].real() * grid.cell_volume();
  fourier_[0] = 1.0;
}

double MollifierSpec::value(const Vec& x) const noexcept {
  const int d = grid_.dim();
  double s2 = 0.0;
  for (int a = 0; a < d; ++a) s2 += x[static_cast<std::size_t>(a)] * x[static_cast<std::size_t>(a)];
  const double s = std::sqrt(s2) / r_;
  if (s >= 1.0) return 0.0;
  const double t = 1.0 - s;
  return c_ / std::pow(r_, d) * t * t * t * t * (1.0 + 4.0 * s);
}

Vec MollifierSpec::gradient(const Vec& x) const noexcept {
  const int d = grid_.dim();
  double s2 = 0.0;
  for (int a = 0; a < d; ++a) s2 += x[static_cast<std::size_t>(a)] * x[static_cast<std::size_t>(a)];
  const double s = std::sqrt(s2) / r_;
  Vec g{0.0, 0.0, 0.0};
  if (s >= 1.0) return g;
  const double t = 1.0 - s;
  // d/ds [(1-s)^4 (1+4s)] = -20 s (1-s)^3, and ds/dx = x / (r |x|)
  const double f = -20.0 * c_ / std::pow(r_, d + 2) * t * t * t;
  for (int a = 0; a < d; ++a) g[static_cast<std::size_t>(a)] = f * x[static_cast<std::size_t>(a)];
  return g;
}

MollifierSpec make_mollifier(double r, const TorusGrid& grid) {
  if (!(r >= 2.0 * grid.h())) throw InvalidArgument("make_mollifier: r < 2h, mollifier under-resolved");
  if (r > 0.25) throw InvalidArgument("make_mollifier: r must not exceed 1/4");
  return MollifierSpec(r, grid);
}

ScalarField mollify_field(const ScalarField& f, const MollifierSpec& m) {
  if (!(f.grid == m.grid())) throw InvalidArgument("mollify_field: grid mismatch");
  const auto& sp = Spectral::for_grid(f.grid);
  auto c = sp.forward(f.values);
  const auto& kh = m.fourier();
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= kh[k];
  ScalarField out(f.grid, 0.0, f.mean_zero);
  out.values = sp.inverse(c);
  return out;
}

VectorField mollify_field(const VectorField& f, const MollifierSpec& m) {
  if (!(f.grid == m.grid())) throw InvalidArgument("mollify_field: grid mismatch");
  VectorField out(f.grid);
  const auto& sp = Spectral::for_grid(f.grid);
  const auto& kh = m.fourier();
  for (std::size_t a = 0; a < f.components.size(); ++a) {
    auto c = sp.forward(f.components[a]);
    for (std::size_t k = 0; k < c.size(); ++k) c[k] *= kh[k];
    out.components[a] = sp.inverse(c);
  }
  return out;
}

VectorField regularized_pair_force(const MollifierSpec& m) {
  const auto& g = m.grid();
  const auto& sp = Spectral::for_grid(g);
  const auto& kh = m.fourier();
  constexpr double tp = 2.0 * std::numbers::pi;
  VectorField out(g);
  // Values on the grid are h^-d times the transform; fold that into the coefficient.
  const double to_grid = static_cast<double>(g.cells());
  for (int a = 0; a < g.dim(); ++a) {
    std::vector<Complex> c(sp.modes(), Complex(0.0));
    for (std::size_t k = 1; k < sp.modes(); ++k) {
      if (sp.nyquist(k, a)) continue;
      const double green = -1.0 / (tp * tp * sp.k2(k));
      c[k] = Complex(0.0, tp * sp.wavenumber(k, a)) * green * kh[k] * kh[k] * to_grid;
    }
    out.components[static_cast<std::size_t>(a)] = sp.inverse(c);
  }
  return out;
}

}  // namespace vpme

namespace vpme {

double mollifier_radial_cdf(double s, int dim) {
  if (dim != 2 && dim != 3) throw InvalidArgument("mollifier: dimension must be 2 or 3");
  s = std::clamp(s, 0.0, 1.0);
  // (1-t)^4 (1+4t) = 1 - 10t^2 + 20t^3 - 15t^4 + 4t^5
  static constexpr std::array<double, 6> coef{1.0, 0.0, -10.0, 20.0, -15.0, 4.0};
  auto moment = [&](double x) {
    double acc = 0.0;
    for (std::size_t q = 0; q < coef.size(); ++q) {
      const double e = static_cast<double>(q) + dim;
      acc += coef[q] * std::pow(x, e) / e;
    }
    return acc;
  };
  return moment(s) / moment(1.0);
}

std::vector<Vec> equal_mass_offsets(double r, int dim, std::size_t radial, std::size_t angular) {
  if (!(r > 0.0)) throw InvalidArgument("mollifier: radius must be positive");
  if (radial == 0 || angular == 0) throw InvalidArgument("mollifier: empty offset lattice");
  std::vector<Vec> out;
  out.reserve(radial * angular);
  for (std::size_t i = 0; i < radial; ++i) {
    const double target = (static_cast<double>(i) + 0.5) / static_cast<double>(radial);
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (mollifier_radial_cdf(mid, dim) < target ? lo : hi) = mid;
    }
    const double rad = r * 0.5 * (lo + hi);
    const double shift = (i % 2 == 0) ? 0.0 : 0.5;
    for (std::size_t j = 0; j < angular; ++j) {
      const double t = (static_cast<double>(j) + shift) / static_cast<double>(angular);
      if (dim == 2) {
        const double th = 2.0 * std::numbers::pi * t;
        out.push_back(Vec{rad * std::cos(th), rad * std::sin(th), 0.0});
      } else {
        // Fibonacci sphere, rotated per shell.
        const double z = 1.0 - 2.0 * (static_cast<double>(j) + 0.5) / static_cast<double>(angular);
        const double ring = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = 2.0 * std::numbers::pi *
                           (static_cast<double>(j) * 0.6180339887498949 + static_cast<double>(i) * 0.5);
        out.push_back(Vec{rad * ring * std::cos(phi), rad * ring * std::sin(phi), rad * z});
      }
    }
  }
  return out;
}

}  // namespace vpme
