#include <cmath>
#include <numbers>

#include "doctest.h"
#include "vpme/error.hpp"
#include "vpme/field_io.hpp"
#include "vpme/grid.hpp"
#include "vpme/spectral.hpp"

using namespace vpme;

namespace {
constexpr double tau = 2.0 * std::numbers::pi;
}

TEST_SUITE("grid") {
  TEST_CASE("wrapping and minimum image") {
    CHECK(wrap_unit(1.25) == doctest::Approx(0.25));
    CHECK(wrap_unit(-0.25) == doctest::Approx(0.75));
    CHECK(wrap_unit(1.0) == 0.0);
    CHECK(min_image(0.75) == doctest::Approx(-0.25));
    CHECK(min_image(-0.6) == doctest::Approx(0.4));
    CHECK(torus_dist2({0.05, 0.95, 0}, {0.95, 0.05, 0}, 2) == doctest::Approx(0.02));
  }

  TEST_CASE("index and coordinates are inverse") {
    const TorusGrid g(3, 16);
    for (std::size_t c = 0; c < g.cells(); c += 37) {
      const auto ijk = g.coords(c);
      CHECK(g.index(ijk[0], ijk[1], ijk[2]) == c);
    }
    CHECK(g.index(-1, 16, 0) == g.index(15, 0, 0));
  }

  TEST_CASE("rejects invalid shapes") {
    CHECK_THROWS_AS(TorusGrid(4, 8), InvalidArgument);
    CHECK_THROWS_AS(TorusGrid(2, 0), InvalidArgument);
    CHECK_THROWS_AS(TorusGrid(2, 24), InvalidArgument);
  }

  TEST_CASE("spectral Laplacian of a Fourier mode") {
    const TorusGrid g(2, 32);
    const auto f = sample(g, [](const Vec& x) { return std::sin(tau * (2 * x[0] + 3 * x[1])); });
    const auto lap = Spectral::for_grid(g).laplacian(f.values);
    double err = 0.0;
    for (std::size_t c = 0; c < g.cells(); ++c) err = std::max(err, std::abs(lap[c] + 13.0 * tau * tau * f.values[c]));
    CHECK(err < 1e-9);
  }

  TEST_CASE("spectral derivative of a Fourier mode") {
    const TorusGrid g(3, 16);
    const auto f = sample(g, [](const Vec& x) { return std::cos(tau * x[2]); });
    const auto d = Spectral::for_grid(g).derivative(f.values, 2);
    double err = 0.0;
    for (std::size_t c = 0; c < g.cells(); ++c)
      err = std::max(err, std::abs(d[c] + tau * std::sin(tau * g.node(c)[2])));
    CHECK(err < 1e-10);
  }

  TEST_CASE("forward then inverse transform is the identity") {
    const TorusGrid g(2, 16);
    const auto f = sample(g, [](const Vec& x) { return std::exp(std::sin(tau * x[0]) * std::cos(tau * x[1])); });
    const auto& sp = Spectral::for_grid(g);
    const auto back = sp.inverse(sp.forward(f.values));
    CHECK(max_abs_diff(back, f.values) < 1e-13);
  }

  TEST_CASE("binary field round trip") {
    const TorusGrid g(2, 16);
    auto f = sample(g, [](const Vec& x) { return x[0] - 2.0 * x[1]; });
    const auto path = std::filesystem::temp_directory_path() / "vpme_grid_roundtrip.bin";
    write_field_binary(path, f);
    const auto back = std::get<ScalarField>(read_field_binary(path));
    CHECK(back.grid == g);
    CHECK(back.values == f.values);
    std::filesystem::remove(path);
  }
}
