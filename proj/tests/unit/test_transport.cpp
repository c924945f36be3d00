#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "doctest.h"
#include "vpme/ensemble.hpp"
#include "vpme/error.hpp"
#include "vpme/measures.hpp"
#include "vpme/ot_solvers.hpp"

using namespace vpme;

namespace {
Cloud random_cloud(std::size_t n, std::uint64_t seed) {
  DensitySpec f;
  f.family = DensityFamily::perturbed_maxwellian;
  f.alpha = 0.3;
  return to_cloud(sample_iid(f, n, seed));
}

double brute_force(const Cloud& a, const Cloud& b, const MetricSpec& spec) {
  std::vector<std::size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i)
      s += phase_space_cost(a.x[i], a.v[i], b.x[perm[i]], b.v[perm[i]], a.dim, spec);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(a.size());
}

// Clouds whose positions coincide at one point: the problem reduces to the
// real line in v1, where sorted matching is optimal for convex costs.
Cloud line_cloud(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Cloud c;
  for (std::size_t i = 0; i < n; ++i) {
    c.x.push_back({0.5, 0.5, 0.0});
    c.v.push_back({nd(rng), 0.0, 0.0});
  }
  return c;
}

double sorted_quantile(const Cloud& a, const Cloud& b, int p) {
  std::vector<double> u;
  std::vector<double> w;
  for (const auto& v : a.v) u.push_back(v[0]);
  for (const auto& v : b.v) w.push_back(v[0]);
  std::sort(u.begin(), u.end());
  std::sort(w.begin(), w.end());
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += std::pow(std::abs(u[i] - w[i]), p);
  return std::pow(s / static_cast<double>(u.size()), 1.0 / p);
}
}  // namespace

TEST_SUITE("transport") {
  TEST_CASE("exact solver matches permutation enumeration") {
    for (std::size_t n = 2; n <= 8; ++n)
      for (int p : {1, 2}) {
        CAPTURE(n);
        CAPTURE(p);
        const auto a = random_cloud(n, 100 + n);
        const auto b = random_cloud(n, 200 + n);
        MetricSpec spec;
        spec.p = p;
        spec.lambda = 1.5;
        const auto r = wasserstein_exact(a, b, spec);
        CHECK(std::abs(r.plan.total_cost - brute_force(a, b, spec)) <= 1e-9);
        CHECK_NOTHROW(r.plan.validate());
      }
  }

  TEST_CASE("exact solver matches the sorted quantile coupling on a line") {
    for (int p : {1, 2}) {
      const auto a = line_cloud(500, 1);
      const auto b = line_cloud(500, 2);
      MetricSpec spec;
      spec.p = p;
      CHECK(std::abs(wasserstein_exact(a, b, spec).distance - sorted_quantile(a, b, p)) <= 1e-9);
    }
  }

  TEST_CASE("assignment on integer matrices agrees with enumeration") {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> d(0, 20);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 7;
      std::vector<double> c(n * n);
      for (auto& v : c) v = d(rng);
      const auto sol = solve_assignment(c, n);
      double got = 0.0;
      for (std::size_t i = 0; i < n; ++i) got += c[i * n + sol[i]];
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      double best = INFINITY;
      do {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += c[i * n + perm[i]];
        best = std::min(best, s);
      } while (std::next_permutation(perm.begin(), perm.end()));
      CHECK(got == best);
      auto cols = sol;
      std::sort(cols.begin(), cols.end());
      CHECK(std::adjacent_find(cols.begin(), cols.end()) == cols.end());
    }
  }

  TEST_CASE("auction stays within its certified gap") {
    const MetricSpec spec;
    const auto a = random_cloud(256, 5);
    const auto b = random_cloud(256, 6);
    const auto ex = wasserstein_exact(a, b, spec);
    const auto au = wasserstein_auction(a, b, spec);
    const double gap = au.plan.total_cost - ex.plan.total_cost;
    CHECK(gap >= -1e-12);
    CHECK(gap <= au.error_bound + 1e-12);
    CHECK_NOTHROW(au.plan.validate());
  }

  TEST_CASE("auction with unequal sizes equals exact on replicated targets") {
    const MetricSpec spec;
    const auto a = random_cloud(512, 7);
    const auto b = random_cloud(128, 8);
    Cloud rep;
    for (int r = 0; r < 4; ++r) {
      rep.x.insert(rep.x.end(), b.x.begin(), b.x.end());
      rep.v.insert(rep.v.end(), b.v.begin(), b.v.end());
    }
    const auto ex = wasserstein_exact(a, rep, spec);
    const auto au = wasserstein_auction(a, b, spec);
    CHECK(au.plan.total_cost - ex.plan.total_cost <= au.error_bound + 1e-12);
    CHECK(au.plan.total_cost - ex.plan.total_cost >= -1e-12);
    CHECK(au.plan.marginal_error() <= 1e-12);
  }

  TEST_CASE("entropic solver within two percent of exact") {
    const MetricSpec spec;
    const auto a = random_cloud(256, 9);
    const auto b = random_cloud(256, 10);
    const double exact = wasserstein_exact(a, b, spec).distance;
    const auto en = wasserstein_entropic(a, b, spec, 1e-3);
    CHECK(std::abs(en.distance - exact) <= 0.02 * exact);
    CHECK(en.marginal_error <= 1e-4);
  }

  TEST_CASE("distance to itself is zero") {
    const MetricSpec spec;
    const auto a = random_cloud(100, 11);
    CHECK(wasserstein_exact(a, a, spec).distance == 0.0);
    std::string method;
    CHECK(wasserstein(a, a, spec, &method) == 0.0);
    CHECK(method == "exact");
  }

  TEST_CASE("torus wrapping in the cost") {
    MetricSpec spec;
    spec.lambda = 2.0;
    const double c = phase_space_cost({0.95, 0.5, 0}, {1, 0, 0}, {0.05, 0.5, 0}, {0, 0, 0}, 2, spec);
    CHECK(c == doctest::Approx(4.0 * 0.01 + 1.0));
  }

  TEST_CASE("plan export") {
    const MetricSpec spec;
    const auto a = random_cloud(5, 12);
    const auto plan = wasserstein_exact(a, random_cloud(5, 13), spec).plan;
    const auto path = std::filesystem::temp_directory_path() / "vpme_plan.csv";
    write_plan_csv(path, plan);
    std::ifstream is(path);
    std::string line;
    std::getline(is, line);
    CHECK(line == "i,j,weight,cost");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 5);
    std::filesystem::remove(path);
  }

  TEST_CASE("invalid requests") {
    const MetricSpec spec;
    CHECK_THROWS_AS(wasserstein_exact(random_cloud(4, 1), random_cloud(5, 2), spec), InvalidArgument);
    CHECK_THROWS_AS(wasserstein_auction(random_cloud(6, 1), random_cloud(4, 2), spec), InvalidArgument);
    MetricSpec bad;
    bad.p = 3;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  }
}
