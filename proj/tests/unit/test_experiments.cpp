#include <atomic>
#include <cmath>
#include <random>

#include "doctest.h"
#include "vpme/error.hpp"
#include "vpme/experiments.hpp"

using namespace vpme;

TEST_SUITE("experiments") {
  TEST_CASE("exponent regime bounds") {
    CHECK(gamma_bound_shared(2) == doctest::Approx(0.125));
    CHECK(gamma_bound_shared(3) == doctest::Approx(1.0 / 15.0));
    CHECK(gamma_bound_moments(2, 8.0) == doctest::Approx(0.5 / 4.0));
    CHECK(gamma_bound_moments(3, 6.0) == doctest::Approx((1.0 / 3.0) / 5.0));
  }

  TEST_CASE("defaults validate") {
    for (auto k : {ExperimentKind::mean_field, ExperimentKind::quasineutral, ExperimentKind::combined,
                   ExperimentKind::typicality}) {
      auto cfg = default_experiment_config(k);
      CHECK_NOTHROW(cfg.validate());
      CHECK(cfg.regime_notes.empty());
    }
  }

  TEST_CASE("mean field regime is enforced unless overridden") {
    auto cfg = default_experiment_config(ExperimentKind::mean_field);
    cfg.gamma = 0.2;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg.override_regime = true;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.regime_notes.size() == 1);
    const auto h_override = cfg.hash();
    cfg.override_regime = false;
    cfg.gamma = 0.12;
    CHECK(cfg.hash() != h_override);
  }

  TEST_CASE("under-resolved radii are always rejected") {
    auto cfg = default_experiment_config(ExperimentKind::mean_field);
    cfg.c = 0.05;
    cfg.override_regime = true;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    auto q = default_experiment_config(ExperimentKind::quasineutral);
    q.r_fixed = 0.01;
    CHECK_THROWS_AS(q.validate(), InvalidArgument);
  }

  TEST_CASE("reference must be a multiple of every N") {
    auto cfg = default_experiment_config(ExperimentKind::mean_field);
    cfg.n_sweep = {300};
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  }

  TEST_CASE("typicality needs two hundred seeds") {
    auto cfg = default_experiment_config(ExperimentKind::typicality);
    cfg.seeds.resize(199);
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  }

  TEST_CASE("combined schedule monotonicity") {
    auto cfg = default_experiment_config(ExperimentKind::combined);
    std::swap(cfg.schedule[0].epsilon, cfg.schedule[2].epsilon);
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg.override_regime = true;
    CHECK_NOTHROW(cfg.validate());
    CHECK_FALSE(cfg.regime_notes.empty());
  }

  TEST_CASE("triple exponential compliance") {
    const auto c = exp3_compliance(0.4, 0.08, 1.0);
    CHECK(c.required_log3 == doctest::Approx(6.25));
    CHECK_FALSE(c.bound_representable);
    CHECK(c.status == "underflow");
    CHECK(c.r_max == 0.0);
    CHECK(c.actual_log3 == doctest::Approx(std::log(std::log(std::log(1.0 / 0.08)))));
    const auto big = exp3_compliance(2.0, 1e-3, 1.0);
    CHECK(big.bound_representable);
    CHECK(big.r_max == doctest::Approx(1.0 / exp3(0.25)));
    CHECK(std::isnan(exp3_compliance(0.5, 0.5, 1.0).actual_log3));
  }

  TEST_CASE("log-log slope of an exact power law") {
    const std::vector<double> x{1, 2, 4, 8};
    std::vector<double> y;
    for (double v : x) y.push_back(3.0 * std::pow(v, -0.5));
    const auto [s, se] = loglog_slope(x, y);
    CHECK(s == doctest::Approx(-0.5));
    CHECK(se < 1e-12);
    CHECK_THROWS_AS(loglog_slope({1}, {1}), InvalidArgument);
  }

  TEST_CASE("parallel for visits every index once and propagates errors") {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(100, 4, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                      if (i == 7) throw InvalidArgument("boom");
                    }),
                    InvalidArgument);
  }

  TEST_CASE("tail fit dominates synthetic samples") {
    std::mt19937_64 rng(1);
    const std::vector<std::size_t> n{100, 400, 1600};
    std::vector<std::vector<double>> samples;
    for (auto nn : n) {
      std::exponential_distribution<double> ex(static_cast<double>(nn));
      std::vector<double> s(200);
      for (auto& v : s) v = ex(rng);
      samples.push_back(s);
    }
    std::vector<TailPoint> pts;
    const auto fit = fit_tail_bound(2, n, samples, 16.0, 1.0, 20, &pts);
    CHECK(fit.dominates_all);
    CHECK(fit.informative);
    CHECK(fit.median_slope == doctest::Approx(-1.0).epsilon(0.2));
    CHECK(pts.size() == 60);
    for (const auto& p : pts)
      if (p.x > 0.0 && p.empirical == 0.0) CHECK(p.dominated);
  }

  TEST_CASE("single epsilon gives an empty Cauchy table") {
    auto cfg = default_experiment_config(ExperimentKind::quasineutral);
    cfg.eps_sweep = {0.5};
    cfg.n_fixed = 256;
    cfg.r_fixed = 0.1;
    cfg.t_end = 0.05;
    cfg.snapshot_interval = 0.05;
    const auto t = run_quasineutral(cfg);
    CHECK(t.rows.empty());
  }

  TEST_CASE("small mean field sweep yields complete rows") {
    auto cfg = default_experiment_config(ExperimentKind::mean_field);
    cfg.n_sweep = {256};
    cfg.n_ref = 1024;
    cfg.seeds = {1};
    cfg.t_end = 0.05;
    cfg.snapshot_interval = 0.025;
    const auto t = run_mean_field(cfg);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0].distances.size() == 3);
    CHECK(t.rows[0].complete);
    CHECK(t.rows[0].sup_distance > 0.0);
    CHECK(std::isfinite(t.rows[0].aux));
  }

  TEST_CASE("identical runs are at distance zero") {
    SimulationConfig c;
    c.n_particles = 256;
    c.r = 0.1;
    c.t_end = 0.02;
    c.snapshot_interval = 0.02;
    c.init = InitMode::quiet;
    c.store_ensembles = true;
    const auto a = simulate(c);
    const auto b = simulate(c);
    const MetricSpec spec;
    CHECK(wasserstein(to_cloud(*a.snapshots.back().ensemble), to_cloud(*b.snapshots.back().ensemble), spec) == 0.0);
  }

  TEST_CASE("unit suite passes") {
    for (const auto& r : run_unit_suite()) {
      CAPTURE(r.name);
      CAPTURE(r.detail);
      CHECK(r.passed);
    }
  }
}
