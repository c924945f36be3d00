#include "doctest.h"
#include "vpme/config.hpp"
#include "vpme/error.hpp"
#include "vpme/experiments.hpp"

using namespace vpme;

TEST_SUITE("config") {
  TEST_CASE("sections, comments and typed getters") {
    const auto kv = KeyValueConfig::parse(
        "# leading comment\n"
        "[numerics]\n"
        "grid_n = 32   ; trailing comment\n"
        "dt = 5e-4\n"
        "[experiment]\n"
        "seeds = 1, 2, 3\n"
        "override_regime = true\n");
    CHECK(kv.get_int("numerics", "grid_n", 0) == 32);
    CHECK(kv.get_double("numerics", "dt", 0.0) == 5e-4);
    CHECK(kv.get_ints("experiment", "seeds", {}) == std::vector<long long>{1, 2, 3});
    CHECK(kv.get_bool("experiment", "override_regime", false));
    CHECK(kv.get_double("numerics", "T", 7.0) == 7.0);
    CHECK(kv.has("numerics", "dt"));
    CHECK_FALSE(kv.has("numerics", "T"));
  }

  TEST_CASE("malformed text") {
    CHECK_THROWS_AS(KeyValueConfig::parse("[numerics\n"), InvalidArgument);
    CHECK_THROWS_AS(KeyValueConfig::parse("[a]\nkey\n"), InvalidArgument);
    CHECK_THROWS_AS(KeyValueConfig::parse("[a]\nk = 1\nk = 2\n"), InvalidArgument);
    const auto kv = KeyValueConfig::parse("[a]\nx = 1.5q\nn = 2.5\nb = maybe\n");
    CHECK_THROWS_AS(kv.get_double("a", "x", 0.0), InvalidArgument);
    CHECK_THROWS_AS(kv.get_int("a", "n", 0), InvalidArgument);
    CHECK_THROWS_AS(kv.get_bool("a", "b", false), InvalidArgument);
  }

  TEST_CASE("unknown sections and keys are errors") {
    const auto kv = KeyValueConfig::parse("[a]\nx = 1\n[b]\ny = 2\n");
    CHECK_NOTHROW(kv.require_known({{"a", {"x"}}, {"b", {"y"}}}));
    CHECK_THROWS_AS(kv.require_known({{"a", {"x"}}}), InvalidArgument);
    CHECK_THROWS_AS(kv.require_known({{"a", {"z"}}, {"b", {"y"}}}), InvalidArgument);
  }

  TEST_CASE("experiment config from text") {
    const auto cfg = parse_experiment_config(KeyValueConfig::parse(
        "[experiment]\nkind = mean_field\nseed_count = 3\n"
        "[datum]\nfamily = perturbed_maxwellian\nalpha = 0.1\n"
        "[numerics]\nT = 0.25\n"
        "[mean_field]\nN = 256, 512\nN_ref = 2048\ngamma = 0.1\n"));
    CHECK(cfg.kind == ExperimentKind::mean_field);
    CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(cfg.n_sweep == std::vector<std::size_t>{256, 512});
    CHECK(cfg.n_ref == 2048);
    CHECK(cfg.gamma == 0.1);
    CHECK(cfg.t_end == 0.25);
    CHECK(cfg.datum.alpha == 0.1);
  }

  TEST_CASE("experiment config rejects foreign sections and keys") {
    CHECK_THROWS_AS(parse_experiment_config(KeyValueConfig::parse("[experiment]\nkind = mean_field\n[quasineutral]\nr = 0.1\n")),
                    InvalidArgument);
    CHECK_THROWS_AS(parse_experiment_config(KeyValueConfig::parse("[experiment]\nkind = mean_field\n[numerics]\nfoo = 1\n")),
                    InvalidArgument);
    CHECK_THROWS_AS(parse_experiment_config(KeyValueConfig::parse("[experiment]\nkind = teleport\n")), InvalidArgument);
    CHECK_THROWS_AS(parse_experiment_config(KeyValueConfig::parse("[numerics]\nT = 1\n")), InvalidArgument);
  }

  TEST_CASE("combined schedule syntax") {
    const auto cfg = parse_experiment_config(KeyValueConfig::parse(
        "[experiment]\nkind = combined\n[combined]\nschedule = 1024:0.4:0.08, 2048:0.3:0.06\nK = 2\n"));
    REQUIRE(cfg.schedule.size() == 2);
    CHECK(cfg.schedule[1].n == 2048);
    CHECK(cfg.schedule[1].epsilon == 0.3);
    CHECK(cfg.schedule[1].r == 0.06);
    CHECK(cfg.exp3_constant == 2.0);
    CHECK_THROWS_AS(parse_experiment_config(KeyValueConfig::parse(
                        "[experiment]\nkind = combined\n[combined]\nschedule = 1024:0.4\n")),
                    InvalidArgument);
  }

  TEST_CASE("simulation config") {
    const auto s = parse_simulation_config(KeyValueConfig::parse(
        "[simulate]\nN = 200\nepsilon = 0.5\nr = 0.1\ninit = quiet\n[numerics]\nT = 0.5\nsnapshot_interval = 0.25\n"));
    CHECK(s.n_particles == 200);
    CHECK(s.epsilon == 0.5);
    CHECK(s.init == InitMode::quiet);
    CHECK_THROWS_AS(parse_simulation_config(KeyValueConfig::parse("[simulate]\nr = 0.01\n")), InvalidArgument);
    CHECK_THROWS_AS(parse_simulation_config(KeyValueConfig::parse("[simulate]\nwidth = 3\n")), InvalidArgument);
  }
}
