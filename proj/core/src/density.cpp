#include "vpme/density.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "vpme/error.hpp"

namespace vpme {
namespace {

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

DensityFamily parse_density_family(const std::string& name) {
  if (name == "uniform_maxwellian") return DensityFamily::uniform_maxwellian;
  if (name == "perturbed_maxwellian") return DensityFamily::perturbed_maxwellian;
  if (name == "cold_uniform") return DensityFamily::cold_uniform;
  throw InvalidArgument("unknown density family '" + name + "'");
}

std::string to_string(DensityFamily f) {
  switch (f) {
    case DensityFamily::uniform_maxwellian: return "uniform_maxwellian";
    case DensityFamily::perturbed_maxwellian: return "perturbed_maxwellian";
    case DensityFamily::cold_uniform: return "cold_uniform";
  }
  return "unknown";
}

void DensitySpec::validate() const {
  if (dim != 2 && dim != 3) throw InvalidArgument("density: dim must be 2 or 3");
  if (family == DensityFamily::cold_uniform) return;
  if (!(thermal_speed > 0.0)) throw InvalidArgument("density: thermal_speed must be positive");
  if (!(support_radius > 0.0)) throw InvalidArgument("density: support_radius must be positive");
  if (family == DensityFamily::perturbed_maxwellian) {
    if (!(std::abs(alpha) < 1.0)) throw InvalidArgument("density: |alpha| must be < 1");
    if (mode < 1) throw InvalidArgument("density: mode must be >= 1");
  }
}

double DensitySpec::spatial_density(const Vec& x) const noexcept {
  if (family != DensityFamily::perturbed_maxwellian) return 1.0;
  return 1.0 + alpha * std::cos(2.0 * std::numbers::pi * mode * x[0]);
}

double DensitySpec::component_bound() const noexcept { return support_radius / std::sqrt(static_cast<double>(dim)); }

double DensitySpec::velocity_density(const Vec& v) const noexcept {
  double p = 1.0;
  for (int a = 0; a < dim; ++a) p *= component_density(v[static_cast<std::size_t>(a)]);
  return p;
}

double DensitySpec::component_variance() const noexcept {
  if (family == DensityFamily::cold_uniform) return 0.0;
  const double b = component_bound() / thermal_speed;
  const double phi = std::exp(-0.5 * b * b) / std::sqrt(2.0 * std::numbers::pi);
  const double z = 2.0 * std_normal_cdf(b) - 1.0;
  return thermal_speed * thermal_speed * (1.0 - 2.0 * b * phi / z);
}

double DensitySpec::x1_quantile(double u) const {
  if (family != DensityFamily::perturbed_maxwellian || alpha == 0.0) return u;
  // F(x) = x + alpha sin(2 pi m x) / (2 pi m) is strictly increasing for |alpha| < 1.
  const double w = 2.0 * std::numbers::pi * mode;
  double lo = 0.0;
  double hi = 1.0;
  double x = u;
  for (int it = 0; it < 100; ++it) {
    const double f = x + alpha * std::sin(w * x) / w - u;
    if (std::abs(f) < 1e-15) break;
    if (f > 0.0) hi = x; else lo = x;
    const double df = 1.0 + alpha * std::cos(w * x);
    double next = x - f / df;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  return x;
}

double DensitySpec::velocity_quantile(double u) const {
  if (family == DensityFamily::cold_uniform) return 0.0;
  const double b = component_bound() / thermal_speed;
  const double lo = std_normal_cdf(-b);
  const double hi = std_normal_cdf(b);
  const double p = lo + u * (hi - lo);
  // Phi^{-1}(p) = sqrt(2) erf^{-1}(2p - 1)
  const double z = std::numbers::sqrt2 * boost::math::erf_inv(2.0 * p - 1.0);
  return std::clamp(z, -b, b) * thermal_speed;
}

double DensitySpec::component_density(double v) const noexcept {
  const double L = component_bound();
  if (std::abs(v) > L) return 0.0;
  const double s = thermal_speed;
  const double z = std_normal_cdf(L / s) - std_normal_cdf(-L / s);
  return std::exp(-0.5 * v * v / (s * s)) / (s * std::sqrt(2.0 * std::numbers::pi) * z);
}

double DensitySpec::quadrature_mass() const {
  using Rule = boost::math::quadrature::gauss<double, 20>;
  const int panels = 16;
  auto integrate = [&](auto&& f, double a, double b) {
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
      const double lo = a + (b - a) * p / panels;
      sum += Rule::integrate(f, lo, lo + (b - a) / panels);
    }
    return sum;
  };
  const double x_mass = integrate([this](double x) { return spatial_density(Vec{x, 0.0, 0.0}); }, 0.0, 1.0);
  if (family == DensityFamily::cold_uniform) return x_mass;
  const double L = component_bound();
  const double v_mass = integrate([this](double v) { return component_density(v); }, -L, L);
  return x_mass * std::pow(v_mass, dim);
}

std::string canonical_string(const DensitySpec& f) {
  std::ostringstream os;
  os.precision(17);
  os << "family=" << to_string(f.family) << ";dim=" << f.dim << ";thermal_speed=" << f.thermal_speed
     << ";support_radius=" << f.support_radius << ";alpha=" << f.alpha << ";mode=" << f.mode;
  return os.str();
}

}  // namespace vpme
