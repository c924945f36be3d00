#include <chrono>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "vpme/error.hpp"
#include "vpme/poisson.hpp"
#include "vpme/spectral.hpp"

using namespace vpme;

namespace {
constexpr double tau = 2.0 * std::numbers::pi;

// U* = a sin(2 pi (x - 2y)) + b cos(2 pi 3 z) shifted so that <e^U*> = 1,
// rho = e^U* - eps^2 Lap U* with the Laplacian taken analytically.
struct Manufactured {
  ScalarField u;
  ScalarField rho;
};

Manufactured manufactured(const TorusGrid& g, double eps) {
  const double a = 0.2;
  const double b = 0.1;
  auto mode = [&](const Vec& x) {
    return a * std::sin(tau * (x[0] - 2.0 * x[1])) + (g.dim() == 3 ? b * std::cos(tau * 3.0 * x[2]) : 0.0);
  };
  auto lap = [&](const Vec& x) {
    return -tau * tau * (5.0 * a * std::sin(tau * (x[0] - 2.0 * x[1])) +
                         (g.dim() == 3 ? 9.0 * b * std::cos(tau * 3.0 * x[2]) : 0.0));
  };
  Manufactured m{sample(g, mode), ScalarField(g)};
  double mass = 0.0;
  for (double v : m.u.values) mass += std::exp(v);
  mass /= static_cast<double>(g.cells());
  for (double& v : m.u.values) v -= std::log(mass);
  for (std::size_t c = 0; c < g.cells(); ++c)
    m.rho.values[c] = std::exp(m.u.values[c]) - eps * eps * lap(g.node(c));
  return m;
}
}  // namespace

TEST_SUITE("poisson") {
  TEST_CASE("linear solve of a single mode") {
    const TorusGrid g(2, 32);
    const double eps = 0.5;
    const auto rho = sample(g, [](const Vec& x) { return 1.0 + 0.3 * std::cos(tau * x[1]); });
    const auto u = solve_linear_poisson(rho, eps);
    // eps^2 Lap Ubar = -0.3 cos  =>  Ubar = 0.3 cos / (eps^2 4 pi^2)
    double err = 0.0;
    for (std::size_t c = 0; c < g.cells(); ++c)
      err = std::max(err, std::abs(u.values[c] - 0.3 * std::cos(tau * g.node(c)[1]) / (eps * eps * tau * tau)));
    CHECK(err < 1e-13);
    CHECK(std::abs(u.mean()) < 1e-14);
  }

  TEST_CASE("manufactured solution across epsilon with continuation") {
    const TorusGrid g(2, 64);
    for (double eps : {1.0, 0.5, 0.1}) {
      CAPTURE(eps);
      const auto m = manufactured(g, eps);
      const auto t0 = std::chrono::steady_clock::now();
      const auto sol = solve_full_potential(m.rho, eps);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      CHECK(max_abs_diff(sol.u_total.values, m.u.values) <= 1e-8);
      CHECK(secs <= 1.0);
      double mean_exp = 0.0;
      for (double v : sol.u_total.values) mean_exp += std::exp(v) / static_cast<double>(g.cells());
      CHECK(std::abs(mean_exp - 1.0) <= 1e-8);
    }
  }

  TEST_CASE("manufactured solution in three dimensions") {
    const TorusGrid g(3, 16);
    const auto m = manufactured(g, 0.5);
    const auto sol = solve_full_potential(m.rho, 0.5);
    CHECK(max_abs_diff(sol.u_total.values, m.u.values) <= 1e-8);
  }

  TEST_CASE("splitting residuals") {
    const TorusGrid g(2, 64);
    const double eps = 0.5;
    const auto m = manufactured(g, eps);
    const auto sol = solve_full_potential(m.rho, eps);
    const auto& sp = Spectral::for_grid(g);
    std::vector<double> sum(g.cells());
    for (std::size_t c = 0; c < g.cells(); ++c) sum[c] = sol.u_bar.values[c] + sol.u_hat.values[c];
    const auto lap_sum = sp.laplacian(sum);
    const auto lap_hat = sp.laplacian(sol.u_hat.values);
    double full = 0.0;
    double hat = 0.0;
    for (std::size_t c = 0; c < g.cells(); ++c) {
      const double eu = std::exp(sol.u_total.values[c]);
      full = std::max(full, std::abs(eps * eps * lap_sum[c] - eu + m.rho.values[c]));
      hat = std::max(hat, std::abs(eps * eps * lap_hat[c] - eu + 1.0));
    }
    CHECK(full <= 1e-10);
    CHECK(hat <= 1e-8);
    CHECK(sol.u_bar.mean() == doctest::Approx(0.0).epsilon(1e-14));
  }

  TEST_CASE("uniform density gives the zero potential") {
    const TorusGrid g(2, 16);
    const auto sol = solve_full_potential(ScalarField(g, 1.0), 0.3);
    CHECK(sol.u_total.max_abs() < 1e-14);
    CHECK(sol.e_field.max_abs() < 1e-14);
  }

  TEST_CASE("field is minus the gradient") {
    const TorusGrid g(2, 32);
    const auto u = sample(g, [](const Vec& x) { return std::sin(tau * x[0]); });
    const auto e = gradient_field(u);
    double err = 0.0;
    for (std::size_t c = 0; c < g.cells(); ++c)
      err = std::max(err, std::abs(e.components[0][c] + tau * std::cos(tau * g.node(c)[0])));
    CHECK(err < 1e-11);
    CHECK(max_abs_diff(e.components[1], std::vector<double>(g.cells(), 0.0)) < 1e-13);
  }

  TEST_CASE("invalid inputs") {
    const TorusGrid g(2, 16);
    CHECK_THROWS_AS(solve_linear_poisson(ScalarField(g, 2.0), 1.0), InvalidArgument);
    CHECK_THROWS_AS(solve_potential(ScalarField(g, 1.0), 0.0), InvalidArgument);
    ScalarField bad(g, 1.0);
    bad.values[3] = std::nan("");
    CHECK_THROWS_AS(solve_full_potential(bad, 1.0), InvalidArgument);
  }

  TEST_CASE("iteration cap raises a solver failure with the last residual") {
    const TorusGrid g(2, 32);
    const auto m = manufactured(g, 0.1);
    NewtonOptions opts;
    opts.max_iterations = 1;
    opts.continuation = false;
    try {
      (void)solve_potential(m.rho, 0.1, nullptr, opts);
      FAIL("expected a solver failure");
    } catch (const SolverFailure& f) {
      CHECK(f.last_residual() > 0.0);
    }
  }
}
