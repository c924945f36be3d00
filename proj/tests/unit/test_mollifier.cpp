#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "vpme/error.hpp"
#include "vpme/mollifier.hpp"

using namespace vpme;

namespace {
constexpr double pi = std::numbers::pi;

// Continuous Fourier transform of the radial profile in d=2 (Hankel transform).
double chi_hat_2d(const MollifierSpec& m, double k) {
  const double r = m.radius();
  auto f = [&](double s) { return m.value({s, 0.0, 0.0}) * boost::math::cyl_bessel_j(0, 2.0 * pi * k * s) * s; };
  double total = 0.0;
  constexpr int panels = 8;
  for (int p = 0; p < panels; ++p)
    total += boost::math::quadrature::gauss<double, 20>::integrate(f, r * p / panels, r * (p + 1) / panels);
  return 2.0 * pi * total;
}
}  // namespace

TEST_SUITE("mollifier") {
  TEST_CASE("unit mass, radial symmetry and compact support") {
    const TorusGrid g(2, 64);
    const auto m = make_mollifier(0.1, g);
    double mass = 0.0;
    for (double v : m.samples().values) mass += v * g.cell_volume();
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(m.value({0.03, 0.04, 0.0}) == doctest::Approx(m.value({0.05, 0.0, 0.0})));
    CHECK(m.value({0.1, 0.0, 0.0}) == 0.0);
    CHECK(m.value({0.08, 0.07, 0.0}) == 0.0);
    CHECK(m.value({0.0, 0.0, 0.0}) > m.value({0.05, 0.0, 0.0}));
  }

  TEST_CASE("profile mass on R^d integrates to one") {
    for (int d : {2, 3}) {
      const TorusGrid g(d, 16);
      const auto m = make_mollifier(0.2, g);
      auto shell = [&](double s) {
        return m.value({s, 0.0, 0.0}) * (d == 2 ? 2.0 * pi * s : 4.0 * pi * s * s);
      };
      const double mass = boost::math::quadrature::gauss<double, 30>::integrate(shell, 0.0, 0.2);
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("radial mass fraction") {
    for (int d : {2, 3}) {
      CHECK(mollifier_radial_cdf(0.0, d) == 0.0);
      CHECK(mollifier_radial_cdf(1.0, d) == doctest::Approx(1.0));
      double prev = 0.0;
      for (double s = 0.05; s <= 1.0; s += 0.05) {
        const double c = mollifier_radial_cdf(s, d);
        CHECK(c > prev);
        prev = c;
      }
    }
    const TorusGrid g(2, 16);
    const auto m = make_mollifier(0.2, g);
    auto shell = [&](double s) { return m.value({s, 0.0, 0.0}) * 2.0 * pi * s; };
    const double inner = boost::math::quadrature::gauss<double, 30>::integrate(shell, 0.0, 0.2 * 0.4);
    CHECK(mollifier_radial_cdf(0.4, 2) == doctest::Approx(inner).epsilon(1e-10));
  }

  TEST_CASE("equal mass offsets") {
    const auto o = equal_mass_offsets(0.1, 2, 6, 12);
    CHECK(o.size() == 72);
    Vec mean{0, 0, 0};
    for (const auto& v : o) {
      CHECK(std::hypot(v[0], v[1]) <= 0.1);
      for (int a = 0; a < 2; ++a) mean[a] += v[a] / 72.0;
    }
    CHECK(std::abs(mean[0]) < 1e-15);
    CHECK(std::abs(mean[1]) < 1e-15);
    CHECK_THROWS_AS(equal_mass_offsets(0.1, 2, 0, 4), InvalidArgument);
  }

  TEST_CASE("pair force vanishes at the origin and is odd") {
    const TorusGrid g(2, 64);
    const auto f = regularized_pair_force(make_mollifier(0.1, g));
    for (int a = 0; a < 2; ++a) CHECK(std::abs(f.components[a][0]) <= 1e-12);
    double odd = 0.0;
    for (std::size_t c = 0; c < g.cells(); ++c) {
      const auto ij = g.coords(c);
      const auto mirror = g.index(-ij[0], -ij[1]);
      for (int a = 0; a < 2; ++a) odd = std::max(odd, std::abs(f.components[a][c] + f.components[a][mirror]));
    }
    CHECK(odd <= 1e-12);
  }

  TEST_CASE("pair force matches a direct Fourier series") {
    const TorusGrid g(2, 64);
    const auto m = make_mollifier(0.1, g);
    const auto f = regularized_pair_force(m);
    // chi*K*chi (x) = sum_k chi_hat(k)^2 k sin(2 pi k.x) / (2 pi |k|^2)
    const int kmax = g.n() / 2 - 1;
    std::vector<double> hat(static_cast<std::size_t>(2 * kmax * kmax + 1), 0.0);
    for (std::size_t q = 1; q < hat.size(); ++q) hat[q] = chi_hat_2d(m, std::sqrt(static_cast<double>(q)));
    double worst = 0.0;
    double scale = f.max_abs();
    for (const auto& node : {std::array<int, 2>{3, 0}, {5, 7}, {-9, 2}, {20, -13}, {32, 32}}) {
      const Vec x = g.node(g.index(node[0], node[1]));
      double fx = 0.0;
      double fy = 0.0;
      for (int k1 = -kmax; k1 <= kmax; ++k1)
        for (int k2 = -kmax; k2 <= kmax; ++k2) {
          const int q = k1 * k1 + k2 * k2;
          if (q == 0) continue;
          const double w = hat[static_cast<std::size_t>(q)] * hat[static_cast<std::size_t>(q)] *
                           std::sin(2.0 * pi * (k1 * x[0] + k2 * x[1])) / (2.0 * pi * q);
          fx += w * k1;
          fy += w * k2;
        }
      const auto c = g.index(node[0], node[1]);
      worst = std::max({worst, std::abs(fx - f.components[0][c]), std::abs(fy - f.components[1][c])});
    }
    CHECK(worst <= 1e-3 * scale);
  }

  TEST_CASE("radius limits") {
    const TorusGrid g(2, 64);
    CHECK_THROWS_AS(make_mollifier(0.02, g), InvalidArgument);
    CHECK_THROWS_AS(make_mollifier(0.3, g), InvalidArgument);
    CHECK_NOTHROW(make_mollifier(2.0 / 64.0, g));
  }

  TEST_CASE("mollifying a constant is the identity") {
    const TorusGrid g(2, 32);
    const auto m = make_mollifier(0.1, g);
    const auto out = mollify_field(ScalarField(g, 2.5), m);
    CHECK(max_abs_diff(out.values, std::vector<double>(g.cells(), 2.5)) < 1e-12);
  }
}
