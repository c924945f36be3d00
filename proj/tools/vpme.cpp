// Command line front end: one subcommand per experiment kind plus the
// Poisson check, single simulations and the built-in unit suite.
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "vpme/config.hpp"
#include "vpme/error.hpp"
#include "vpme/experiments.hpp"
#include "vpme/reports.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::string out = "results";
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  bool override_regime = false;
};

void add_common(CLI::App* app, CommonFlags& f, bool with_regime) {
  app->add_option("--config", f.config, "Structured key = value configuration file")->check(CLI::ExistingFile);
  app->add_option("--out", f.out, "Output root; reports go to <out>/<experiment>/<config-hash>/");
  app->add_option("--seed", f.seed, "Base seed; a seed list becomes seed, seed+1, ...");
  app->add_option("--workers", f.workers, "Worker threads")->check(CLI::PositiveNumber);
  if (with_regime)
    app->add_flag("--override-regime", f.override_regime,
                  "Run schedules outside the supported exponent regime and record it in meta.json");
}

vpme::ExperimentConfig experiment_config(vpme::ExperimentKind kind, const CommonFlags& f) {
  vpme::ExperimentConfig cfg =
      f.config.empty() ? vpme::default_experiment_config(kind) : vpme::load_experiment_config(f.config);
  if (cfg.kind != kind)
    throw vpme::InvalidArgument("config declares kind '" + to_string(cfg.kind) + "' but the subcommand runs '" +
                                to_string(kind) + "'");
  if (f.seed) {
    if (cfg.seeds.empty()) cfg.seeds.push_back(*f.seed);
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) cfg.seeds[i] = *f.seed + i;
  }
  if (f.workers) cfg.workers = *f.workers;
  if (f.override_regime) cfg.override_regime = true;
  cfg.validate();
  for (const auto& note : cfg.regime_notes) std::cerr << "regime override: " << note << '\n';
  return cfg;
}

void progress(const std::string& msg) { std::cerr << msg << '\n'; }

void announce(const vpme::ReportPaths& p) { std::cout << "wrote " << p.dir.string() << '\n'; }

void print_table(const vpme::ConvergenceTable& t) {
  for (std::size_t i = 0; i < t.sweep_values.size(); ++i)
    std::printf("%-14s %12g  median sup distance %.6e\n", t.experiment.c_str(), t.sweep_values[i], t.medians[i]);
  if (t.sweep_values.size() >= 2)
    std::printf("log-log slope %.4f  band [%.4f, %.4f]\n", t.slope, t.slope_lo, t.slope_hi);
  for (const auto& c : t.compliance)
    std::printf("eps %g r %g  required log3 %g  actual log3 %g  bound %s\n", c.epsilon, c.r, c.required_log3,
                c.actual_log3, c.status.c_str());
  for (const auto& row : t.rows)
    if (!row.note.empty()) std::printf("note (%g): %s\n", row.sweep_value, row.note.c_str());
}

int run_convergence(vpme::ExperimentKind kind, const CommonFlags& f) {
  const auto cfg = experiment_config(kind, f);
  vpme::ConvergenceTable t;
  switch (kind) {
    case vpme::ExperimentKind::mean_field: t = vpme::run_mean_field(cfg, progress); break;
    case vpme::ExperimentKind::quasineutral: t = vpme::run_quasineutral(cfg, progress); break;
    case vpme::ExperimentKind::combined: t = vpme::run_combined(cfg, progress); break;
    default: throw vpme::InvalidArgument("not a convergence experiment");
  }
  print_table(t);
  announce(vpme::write_report(f.out, vpme::make_meta(cfg, t), vpme::convergence_csv(t), vpme::timing_json(t)));
  return 0;
}

int run_typicality(const CommonFlags& f) {
  const auto cfg = experiment_config(vpme::ExperimentKind::typicality, f);
  const auto t = vpme::run_typicality(cfg, progress);
  for (const auto& fit : t.fits)
    std::printf("d=%d  c=%g C=%g  dominates all points: %s  informative: %s  median slope %.4f\n", fit.dim, fit.c,
                fit.C, fit.dominates_all ? "yes" : "no", fit.informative ? "yes" : "no", fit.median_slope);
  announce(vpme::write_report(f.out, vpme::make_meta(cfg, t), vpme::tail_csv(t), vpme::timing_json(t)));
  return 0;
}

int run_simulate(const CommonFlags& f) {
  vpme::SimulationConfig cfg;
  if (!f.config.empty()) cfg = vpme::parse_simulation_config(vpme::KeyValueConfig::load(f.config));
  if (f.seed) cfg.seed = *f.seed;
  cfg.validate();
  const auto rec = vpme::simulate(cfg);
  std::printf("steps %zu  dt %g  max relative energy drift %.3e  %s\n", rec.steps, rec.dt,
              rec.max_relative_energy_drift, rec.complete ? "complete" : ("incomplete: " + rec.error).c_str());
  announce(vpme::write_report(f.out, vpme::make_meta(cfg, rec), vpme::simulation_csv(rec)));
  return rec.complete ? 0 : 1;
}

int run_poisson(const CommonFlags& f, int grid_n) {
  const std::vector<double> eps{1.0, 0.5, 0.1};
  const auto rows = vpme::run_poisson_check(grid_n, eps);
  bool ok = true;
  for (const auto& r : rows) {
    const bool pass = r.max_error <= 1e-8 && r.neutrality_error <= 1e-8 && r.full_residual <= 1e-10 &&
                      r.hat_residual <= 1e-8;
    ok = ok && pass;
    std::printf("eps %-5g error %.2e  |<e^U>-1| %.2e  residual %.2e  hat residual %.2e  newton %d  %.3fs  %s\n",
                r.epsilon, r.max_error, r.neutrality_error, r.full_residual, r.hat_residual, r.newton_iters,
                r.runtime_s, pass ? "ok" : "FAILED");
  }
  vpme::ReportMeta meta;
  meta.experiment = "poisson_test";
  meta.config = "grid_n=" + std::to_string(grid_n) + ";epsilon=1,0.5,0.1";
  meta.config_hash = vpme::hex_hash(vpme::fnv1a64(meta.config));
  meta.code_version = vpme::code_version();
  meta.tolerances = {{"newton_residual", vpme::NewtonOptions{}.tolerance}};
  meta.columns.assign(vpme::kPoissonColumns.begin(), vpme::kPoissonColumns.end());
  announce(vpme::write_report(f.out, meta, vpme::poisson_csv(rows)));
  return ok ? 0 : 1;
}

int run_suite() {
  int failed = 0;
  for (const auto& r : vpme::run_unit_suite()) {
    std::printf("%s  %s (%s)\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    failed += r.passed ? 0 : 1;
  }
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vlasov-Poisson with massless electrons: particle simulation and convergence studies"};
  app.require_subcommand(1);

  CommonFlags f;
  int grid_n = 64;
  auto* poisson = app.add_subcommand("poisson-test", "Manufactured nonlinear Poisson check");
  add_common(poisson, f, false);
  poisson->add_option("--grid", grid_n, "Grid points per axis")->check(CLI::PositiveNumber);
  auto* sim = app.add_subcommand("simulate", "Single particle run");
  add_common(sim, f, false);
  auto* mf = app.add_subcommand("mean-field", "Convergence in N at epsilon = 1");
  add_common(mf, f, true);
  auto* qn = app.add_subcommand("quasineutral", "Cauchy differences in epsilon");
  add_common(qn, f, true);
  auto* comb = app.add_subcommand("combined", "Joint (N, epsilon, r) schedule");
  add_common(comb, f, true);
  auto* typ = app.add_subcommand("typicality", "Tail of W2^2 between iid samples and f0");
  add_common(typ, f, true);
  auto* suite = app.add_subcommand("unit-suite", "Fast built-in property checks");

  CLI11_PARSE(app, argc, argv);
  try {
    if (poisson->parsed()) return run_poisson(f, grid_n);
    if (sim->parsed()) return run_simulate(f);
    if (mf->parsed()) return run_convergence(vpme::ExperimentKind::mean_field, f);
    if (qn->parsed()) return run_convergence(vpme::ExperimentKind::quasineutral, f);
    if (comb->parsed()) return run_convergence(vpme::ExperimentKind::combined, f);
    if (typ->parsed()) return run_typicality(f);
    if (suite->parsed()) return run_suite();
  } catch (const vpme::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
