#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "vpme/diagnostics.hpp"
#include "vpme/error.hpp"

using namespace vpme;

TEST_SUITE("diagnostics") {
  TEST_CASE("analytic norm of a single mode") {
    const TorusGrid g(2, 32);
    const auto f = sample(g, [](const Vec& x) { return std::cos(2.0 * std::numbers::pi * (x[0] + x[1])); });
    // two coefficients of size 1/2 at |k|_1 = 2
    const auto r = analytic_norm(f, 1.5, 2);
    CHECK(r.value == doctest::Approx(1.5 * 1.5));
    CHECK(r.tail < 1e-9);
    CHECK(analytic_norm(f, 1.5, 1).value < 1e-12);
    CHECK(analytic_norm(f, 1.5, 1).tail == doctest::Approx(1.5 * 1.5));
    CHECK_THROWS_AS(analytic_norm(f, 1.0, 2), InvalidArgument);
    CHECK_THROWS_AS(analytic_norm(f, 2.0, -1), InvalidArgument);
  }

  TEST_CASE("density norms") {
    const TorusGrid g(2, 16);
    auto rho = sample(g, [](const Vec& x) { return x[0] < 0.5 ? 0.5 : 1.5; });
    CHECK(density_sup_and_lp(rho, std::numeric_limits<double>::infinity()) == 1.5);
    CHECK(density_sup_and_lp(rho, 2.0) == doctest::Approx(std::sqrt(0.5 * 0.25 + 0.5 * 2.25)));
    CHECK(density_sup_and_lp(ScalarField(g, 1.0), default_density_order(2)) == doctest::Approx(1.0));
    CHECK(default_density_order(3) == doctest::Approx(5.0 / 3.0));
    rho.values[0] = -1.0;
    CHECK_THROWS_AS(density_sup_and_lp(rho, 2.0), InvalidArgument);
  }

  TEST_CASE("growth tracking over a short run") {
    SimulationConfig c;
    c.f0.family = DensityFamily::perturbed_maxwellian;
    c.f0.alpha = 0.2;
    c.n_particles = 128;
    c.r = 0.125;
    c.grid_n = 32;
    c.t_end = 0.1;
    c.snapshot_interval = 0.025;
    c.dt = 5e-3;
    c.store_ensembles = true;
    const auto rec = simulate(c);
    REQUIRE(rec.complete);
    const auto gd = track_growth(rec, {0.025, 0.1});
    CHECK(gd.times.size() == 5);
    for (std::size_t s = 0; s < gd.times.size(); ++s)
      CHECK(gd.support_radius[s] == doctest::Approx(rec.snapshots[s].ensemble->max_speed()));
    for (std::size_t s = 1; s < gd.h_rho.size(); ++s) CHECK(gd.h_rho[s] >= gd.h_rho[s - 1]);
    CHECK(gd.h_eta[1] >= gd.h_eta[0]);
    CHECK(gd.h_eta[0] > 0.0);

    c.store_ensembles = false;
    CHECK_THROWS_AS(track_growth(simulate(c), {0.1}), InvalidArgument);
    CHECK_THROWS_AS(track_growth(rec, {0.0}), InvalidArgument);
  }

  TEST_CASE("json reports carry their fields") {
    EnergyReport e;
    e.kinetic = 1.0;
    e.total = 3.0;
    const auto s = to_json(e);
    CHECK(s.find("\"kinetic\"") != std::string::npos);
    CHECK(s.find("\"total\"") != std::string::npos);
    const TorusGrid g(2, 16);
    CHECK(to_json(analytic_norm(ScalarField(g, 1.0), 2.0, 3)).find("l1") != std::string::npos);
  }
}
