#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "vpme/error.hpp"
#include "vpme/reports.hpp"

using namespace vpme;

namespace {
std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

ConvergenceTable sample_table() {
  ConvergenceTable t;
  t.experiment = "mean_field";
  t.times = {0.0, 0.25};
  for (double n : {256.0, 512.0})
    for (std::uint64_t s : {1, 2}) {
      ConvergenceRow r;
      r.sweep_value = n;
      r.seed = s;
      r.distances = {0.1 / n * 256, 0.2 / n * 256};
      r.sup_distance = r.distances[1];
      r.aux = 1.5;
      r.note = s == 2 ? "note, with comma" : "";
      t.rows.push_back(r);
    }
  t.sweep_values = {256, 512};
  t.medians = {0.2, 0.1};
  t.slope = -1.0;
  t.compliance.push_back(exp3_compliance(0.4, 0.08, 1.0));
  return t;
}
}  // namespace

TEST_SUITE("reports") {
  TEST_CASE("csv column counts match the schema") {
    const auto csv = convergence_csv(sample_table());
    std::istringstream is(csv);
    std::string line;
    int lines = 0;
    while (std::getline(is, line)) {
      CHECK(csv_field_count(line) == kConvergenceColumns.size());
      ++lines;
    }
    CHECK(lines == 1 + 4 * 2);
    TailTable tt;
    tt.points.push_back({2, 128, 0.01, 0.5, 0.03, 0.9, 0.1, 1.0, true});
    std::istringstream ts(tail_csv(tt));
    while (std::getline(ts, line)) CHECK(csv_field_count(line) == kTailColumns.size());
  }

  TEST_CASE("number formatting round trips") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17}) CHECK(std::stod(format_double(v)) == v);
    CHECK(format_double(std::nan("")) == "nan");
  }

  TEST_CASE("re-emission is byte identical") {
    auto cfg = default_experiment_config(ExperimentKind::mean_field);
    cfg.validate();
    const auto t = sample_table();
    const auto out = std::filesystem::temp_directory_path() / "vpme_reports_test";
    std::filesystem::remove_all(out);
    const auto p1 = write_report(out, make_meta(cfg, t), convergence_csv(t));
    const auto csv1 = slurp(p1.results);
    const auto meta1 = slurp(p1.meta);
    const auto p2 = write_report(out, make_meta(cfg, t), convergence_csv(t));
    CHECK(p1.dir == p2.dir);
    CHECK(slurp(p2.results) == csv1);
    CHECK(slurp(p2.meta) == meta1);
    CHECK(p1.dir == out / "mean_field" / hex_hash(cfg.hash()));
    std::filesystem::remove_all(out);
  }

  TEST_CASE("metadata round trips through the loader") {
    auto cfg = default_experiment_config(ExperimentKind::combined);
    cfg.validate();
    const auto meta = make_meta(cfg, sample_table());
    const auto text = to_json(meta);
    const auto back = parse_meta(text);
    CHECK(to_json(back) == text);
    CHECK(back.config_hash == hex_hash(cfg.hash()));
    CHECK(back.seeds == cfg.seeds);
    CHECK(back.columns.size() == kConvergenceColumns.size());
    CHECK(text.find("underflow") != std::string::npos);
    CHECK_THROWS_AS(parse_meta("{\"experiment\": 3}"), IoError);
  }

  TEST_CASE("unwritable output path") {
    const auto blocker = std::filesystem::temp_directory_path() / "vpme_reports_blocker";
    { std::ofstream(blocker) << "x"; }
    auto cfg = default_experiment_config(ExperimentKind::mean_field);
    const auto t = sample_table();
    CHECK_THROWS_AS(write_report(blocker, make_meta(cfg, t), convergence_csv(t)), IoError);
    std::filesystem::remove(blocker);
  }
}
