#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "vpme/ensemble.hpp"
#include "vpme/error.hpp"
#include "vpme/measures.hpp"
#include "vpme/mollifier.hpp"

using namespace vpme;

namespace {
Cloud cloud(std::size_t n, std::uint64_t seed) {
  DensitySpec f;
  return to_cloud(sample_iid(f, n, seed));
}

// Plan induced by a random permutation between two uniform clouds.
TransportPlan random_plan(const Cloud& a, const Cloud& b, std::uint64_t seed) {
  std::vector<std::size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  TransportPlan plan;
  plan.source = a;
  plan.target = b;
  const double w = 1.0 / static_cast<double>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) plan.entries.push_back({i, perm[i], w, 0.0});
  return plan;
}
}  // namespace

TEST_SUITE("measures") {
  TEST_CASE("tail bound branches") {
    TailParams t;
    t.c = 0.5;
    t.C = 2.0;
    t.k = 10.0;
    t.alpha = 2.0;
    const double n = 50.0;
    const double x = 0.3;
    t.m = 3;  // 2p > m
    CHECK(fg_tail(n, x, t).a == doctest::Approx(2.0 * std::exp(-0.5 * n * x * x)));
    t.m = 4;  // 2p = m
    const double y = x / std::log(2.0 + 1.0 / x);
    CHECK(fg_tail(n, x, t).a == doctest::Approx(2.0 * std::exp(-0.5 * n * y * y)));
    t.m = 6;  // 2p < m
    CHECK(fg_tail(n, x, t).a == doctest::Approx(2.0 * std::exp(-0.5 * n * x * x * x)));
    CHECK(fg_tail(n, x, t).b == doctest::Approx(2.0 * n * std::pow(n * x, -4.0)));
    CHECK(fg_tail(n, x, t).bound == doctest::Approx(fg_tail(n, x, t).a + fg_tail(n, x, t).b));
  }

  TEST_CASE("tail bound beyond x = 1 and in compact mode") {
    TailParams t;
    t.mode = TailMode::compact;
    CHECK(fg_tail(10.0, 1.5, t).bound == 0.0);
    CHECK(fg_tail(10.0, 0.5, t).b == 0.0);
    t.mode = TailMode::moment;
    CHECK(fg_tail(10.0, 1.5, t).bound == fg_tail(10.0, 1.5, t).b);
    CHECK(fg_tail(10.0, 1.5, t).b > 0.0);
  }

  TEST_CASE("tail bound rejects invalid parameters") {
    TailParams t;
    CHECK_THROWS_AS(fg_tail(0.5, 0.1, t), InvalidArgument);
    CHECK_THROWS_AS(fg_tail(10.0, 0.0, t), InvalidArgument);
    t.k = 4.0;
    CHECK_THROWS_AS(fg_tail(10.0, 0.1, t), InvalidArgument);
    t.k = 6.0;
    t.alpha = 7.0;
    CHECK_THROWS_AS(fg_tail(10.0, 0.1, t), InvalidArgument);
  }

  TEST_CASE("anisotropic functional controls both distances") {
    for (int trial = 0; trial < 50; ++trial) {
      CAPTURE(trial);
      const auto a = cloud(24, 1000 + static_cast<std::uint64_t>(trial));
      const auto b = cloud(24, 2000 + static_cast<std::uint64_t>(trial));
      const double lambda = 1.0 + 0.2 * trial;
      const auto plan = random_plan(a, b, static_cast<std::uint64_t>(trial));
      const double d = anisotropic_D(plan, lambda);
      const MetricSpec w2;
      const double full = std::pow(wasserstein_exact(a, b, w2).distance, 2);
      const double pos = std::pow(wasserstein_exact(position_marginal(a), position_marginal(b), w2).distance, 2);
      CHECK(full <= d + 1e-9);
      CHECK(pos <= d / (lambda * lambda) + 1e-9);
    }
  }

  TEST_CASE("mollified cloud stays within r of the original") {
    const auto off = equal_mass_offsets(0.08, 2, 4, 8);
    const MetricSpec spec;
    const auto a = cloud(32, 3);
    const auto mol = mollify_cloud(a, off);
    CHECK(mol.size() == 32 * off.size());
    const auto d = wasserstein_auction(mol, a, spec);
    CHECK(d.distance <= 0.08);
  }

  TEST_CASE("mollification does not increase the distance beyond 2h") {
    const TorusGrid g(2, 64);
    const auto off = equal_mass_offsets(0.1, 2, 3, 6);
    const MetricSpec spec;
    const auto a = cloud(20, 4);
    const auto b = cloud(20, 5);
    const double plain = wasserstein_exact(a, b, spec).distance;
    const double mol = wasserstein_exact(mollify_cloud(a, off), mollify_cloud(b, off), spec).distance;
    CHECK(mol <= plain + 2.0 * g.h());
  }

  TEST_CASE("velocity scaling") {
    const auto a = cloud(5, 6);
    const auto s = scale_velocities(a, 2.0);
    CHECK(s.v[3][1] == doctest::Approx(a.v[3][1] / 2.0));
    CHECK_THROWS_AS(scale_velocities(a, 0.0), InvalidArgument);
  }

  TEST_CASE("semi discrete distance requires a fine quadrature") {
    DensitySpec f;
    const auto e = sample_iid(f, 64, 7);
    const MetricSpec spec;
    CHECK_THROWS_AS(semi_discrete_distance(f, e, spec, 128), InvalidArgument);
    const auto r = semi_discrete_distance(f, e, spec, 256);
    CHECK(r.quadrature_size == 256);
    CHECK(r.distance > r.r_quad);
    CHECK(r.r_quad > 0.0);
  }

  TEST_CASE("semi discrete distance shrinks with N") {
    DensitySpec f;
    const MetricSpec spec;
    const auto q = make_quadrature(f, 2048, spec, false);
    double small = 0.0;
    double large = 0.0;
    for (std::uint64_t s = 1; s <= 5; ++s) {
      small += semi_discrete_distance(q, sample_iid(f, 64, s), spec).distance;
      large += semi_discrete_distance(q, sample_iid(f, 512, s), spec).distance;
    }
    CHECK(large < small);
  }
}
