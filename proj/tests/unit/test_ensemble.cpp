#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "doctest.h"
#include "vpme/density.hpp"
#include "vpme/ensemble.hpp"
#include "vpme/error.hpp"

using namespace vpme;

TEST_SUITE("ensemble") {
  TEST_CASE("iid sampling is reproducible per seed") {
    DensitySpec f;
    const auto a = sample_iid(f, 64, 7);
    const auto b = sample_iid(f, 64, 7);
    const auto c = sample_iid(f, 64, 8);
    CHECK(a.positions == b.positions);
    CHECK(a.velocities == b.velocities);
    CHECK(a.positions != c.positions);
    CHECK_NOTHROW(a.validate());
  }

  TEST_CASE("velocities respect the truncation radius") {
    DensitySpec f;
    f.dim = 3;
    f.support_radius = 2.0;
    const auto e = sample_iid(f, 2000, 3);
    CHECK(e.max_speed() <= 2.0);
  }

  TEST_CASE("quiet start reproduces the spatial density moments") {
    DensitySpec f;
    f.family = DensityFamily::perturbed_maxwellian;
    f.alpha = 0.3;
    f.mode = 2;
    const auto e = quiet_start(f, 4096);
    // E[cos(2 pi m x1)] under rho0 = 1 + alpha cos(2 pi m x1) is alpha / 2
    double mc = 0.0;
    Vec mv{0, 0, 0};
    for (std::size_t i = 0; i < e.size(); ++i) {
      mc += std::cos(2.0 * std::numbers::pi * 2.0 * e.positions[i][0]) / 4096.0;
      for (int a = 0; a < 2; ++a) mv[a] += e.velocities[i][a] / 4096.0;
    }
    CHECK(mc == doctest::Approx(0.15).epsilon(1e-3));
    CHECK(std::abs(mv[0]) < 1e-2);
    CHECK(std::abs(mv[1]) < 1e-2);
    CHECK(quiet_start(f, 4096).positions == e.positions);
  }

  TEST_CASE("quantiles invert the marginal CDF") {
    DensitySpec f;
    f.family = DensityFamily::perturbed_maxwellian;
    f.alpha = 0.5;
    for (double u : {0.1, 0.37, 0.8}) {
      const double x = f.x1_quantile(u);
      // CDF of 1 + alpha cos(2 pi x) is x + alpha sin(2 pi x) / (2 pi)
      CHECK(x + 0.5 * std::sin(2.0 * std::numbers::pi * x) / (2.0 * std::numbers::pi) ==
            doctest::Approx(u).epsilon(1e-12));
      const double v = f.velocity_quantile(u);
      const double b = f.component_bound();
      const double cdf = boost::math::quadrature::gauss<double, 30>::integrate(
          [&](double s) { return f.component_density(s); }, -b, v);
      CHECK(cdf == doctest::Approx(u).epsilon(1e-9));
    }
  }

  TEST_CASE("phase space mass is one") {
    DensitySpec f;
    f.family = DensityFamily::perturbed_maxwellian;
    f.alpha = 0.2;
    CHECK(f.quadrature_mass() == doctest::Approx(1.0).epsilon(1e-10));
  }

  TEST_CASE("binary round trip") {
    DensitySpec f;
    auto e = sample_iid(f, 33, 5);
    e.epsilon = 0.25;
    e.r = 0.07;
    e.time = 1.5;
    const auto path = std::filesystem::temp_directory_path() / "vpme_ensemble_roundtrip.bin";
    write_ensemble_binary(path, e);
    const auto back = read_ensemble_binary(path);
    CHECK(back.positions == e.positions);
    CHECK(back.velocities == e.velocities);
    CHECK(back.epsilon == 0.25);
    CHECK(back.r == 0.07);
    CHECK(back.time == 1.5);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_ensemble_binary(path), IoError);
  }

  TEST_CASE("invalid data") {
    DensitySpec f;
    CHECK_THROWS_AS(sample_iid(f, 0, 1), InvalidArgument);
    f.alpha = 1.5;
    f.family = DensityFamily::perturbed_maxwellian;
    CHECK_THROWS_AS(f.validate(), InvalidArgument);
    ParticleEnsemble e;
    e.positions = {{1.2, 0.0, 0.0}};
    e.velocities = {{0.0, 0.0, 0.0}};
    CHECK_THROWS_AS(e.validate(), InvalidArgument);
  }
}
