#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "vpme/config.hpp"
#include "vpme/density.hpp"
#include "vpme/measures.hpp"
#include "vpme/pic.hpp"
#include "vpme/simulate.hpp"

namespace vpme {

enum class ExperimentKind { mean_field, quasineutral, combined, typicality, unit_suite };

ExperimentKind parse_experiment_kind(const std::string& name);
std::string to_string(ExperimentKind k);

struct SchedulePoint {
  std::size_t n = 0;
  double epsilon = 1.0;
  double r = 0.1;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::mean_field;
  DensitySpec datum;

  // Numerics shared by every particle run.
  int grid_n = 64;
  double t_end = 0.5;
  double dt = 1e-3;
  double snapshot_interval = 0.125;
  DepositionScheme scheme = DepositionScheme::kernel;
  MetricSpec metric;

  std::vector<std::size_t> n_sweep;
  std::vector<double> eps_sweep;
  std::vector<std::uint64_t> seeds;

  // r = c N^-gamma schedule (mean field).
  double gamma = 0.12;
  double c = 0.25;
  double epsilon = 1.0;

  // Reference run.
  std::size_t n_ref = 16384;
  double eps_ref = 0.2;
  double r_ref = 0.035;

  // Quasineutral: one fixed N and r.
  std::size_t n_fixed = 4096;
  double r_fixed = 0.0625;

  // Combined: declared joint schedule and the exp_3 constant of the theoretical r bound.
  std::vector<SchedulePoint> schedule;
  double exp3_constant = 1.0;

  // Typicality.
  std::vector<int> dims{2, 3};
  std::size_t quadrature_factor = 4;
  double tail_moment = 16.0;
  double tail_alpha = 1.0;
  int tail_grid = 24;

  bool override_regime = false;
  /// Regime violations acknowledged through the override flag.
  std::vector<std::string> regime_notes;

  int workers = 1;

  /// r(N) = c N^-gamma.
  double schedule_radius(std::size_t n) const;
  /// Throws InvalidArgument on a regime or schedule violation unless override_regime is set,
  /// in which case the violation is appended to regime_notes.
  void validate();
  std::string canonical() const;
  std::uint64_t hash() const;
};

/// Defaults matching the desk-scale acceptance studies for each kind.
ExperimentConfig default_experiment_config(ExperimentKind kind);
/// Parses the structured text format; unknown sections or keys are errors.
ExperimentConfig parse_experiment_config(const KeyValueConfig& kv);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Upper gamma bound 1/(d(d+2)) shared by the mean-field and quasineutral schedules.
double gamma_bound_shared(int d) noexcept;
/// Upper gamma bound (1/(d+2)) min{1/d, 1 - 4/k} for iid data with k moments.
double gamma_bound_moments(int d, double k) noexcept;

/// Theoretical compliance of one combined-schedule point with r <= 1/exp_3(K eps^-2).
struct ComplianceReport {
  double epsilon = 0.0;
  double r = 0.0;
  double required_log3 = 0.0;   ///< K eps^-2 = log log log of 1/r_max
  double actual_log3 = 0.0;     ///< log log log(1/r), NaN when undefined
  bool bound_representable = false;  ///< r_max = exp(-exp(exp(K eps^-2))) is a positive double
  double r_max = 0.0;           ///< 0 when it underflows
  std::string status;           ///< "underflow" or "representable"
};
ComplianceReport exp3_compliance(double epsilon, double r, double K);
/// exp(exp(exp(x))), +inf on overflow.
double exp3(double x) noexcept;

struct ConvergenceRow {
  double sweep_value = 0.0;  ///< N, eps or schedule index
  std::uint64_t seed = 0;
  std::vector<double> distances;  ///< per shared snapshot time
  double sup_distance = 0.0;
  double aux = 0.0;  ///< initial ratio (mean field) or required log_3 (combined)
  double runtime_s = 0.0;
  bool complete = true;
  std::string note;
};

struct ConvergenceTable {
  std::string experiment;
  std::vector<double> times;
  std::vector<ConvergenceRow> rows;
  /// Median sup-distance per distinct sweep value, in sweep order.
  std::vector<double> sweep_values;
  std::vector<double> medians;
  /// Least-squares slope of log median against log sweep value with a 2-sigma band.
  double slope = 0.0;
  double slope_lo = 0.0;
  double slope_hi = 0.0;
  std::vector<ComplianceReport> compliance;
  std::string reference;  ///< description of the reference run
  double reference_runtime_s = 0.0;
};

struct TailPoint {
  int dim = 2;
  std::size_t n = 0;
  double x = 0.0;
  double empirical = 0.0;
  double std_error = 0.0;
  double a = 0.0;
  double b = 0.0;
  double bound = 0.0;
  bool dominated = true;
};

struct TailFit {
  int dim = 2;
  double c = 0.0;
  double C = 0.0;
  bool dominates_all = false;
  /// Every N has at least one grid point where the bound is below 1.
  bool informative = false;
  double median_slope = 0.0;
  std::vector<std::size_t> n_values;
  std::vector<double> medians;  ///< median W_2^2 per N
  std::vector<double> r_quad;   ///< quadrature floor per N
};

struct TailTable {
  std::vector<TailPoint> points;
  std::vector<TailFit> fits;
  /// samples[d index][N index] = W_2^2 per seed
  std::vector<std::vector<std::vector<double>>> samples;
  double runtime_s = 0.0;
};

/// Least-squares fit of log y against log x: slope and its standard error.
std::pair<double, double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Runs fn(i) for i in [0, count) on up to `workers` threads; results land at index i.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

using ProgressFn = std::function<void(const std::string&)>;

ConvergenceTable run_mean_field(const ExperimentConfig& cfg, const ProgressFn& progress = {});
ConvergenceTable run_quasineutral(const ExperimentConfig& cfg, const ProgressFn& progress = {});
ConvergenceTable run_combined(const ExperimentConfig& cfg, const ProgressFn& progress = {});
TailTable run_typicality(const ExperimentConfig& cfg, const ProgressFn& progress = {});

/// Fits one (c, C) pair for the bound a + b over every (N, x) point of one dimension.
TailFit fit_tail_bound(int dim, const std::vector<std::size_t>& n_values,
                       const std::vector<std::vector<double>>& samples, double moment, double alpha, int grid,
                       std::vector<TailPoint>* points);

/// Manufactured nonlinear Poisson check on the d=2 grid of side n.
struct PoissonCheckRow {
  double epsilon = 1.0;
  double max_error = 0.0;         ///< |U - U*| in max-norm
  double neutrality_error = 0.0;  ///< |<e^U> - 1|
  double full_residual = 0.0;     ///< eps^2 Lap(Ubar + Uhat) - e^U + rho
  double hat_residual = 0.0;      ///< eps^2 Lap Uhat - e^U + 1
  int newton_iters = 0;
  double runtime_s = 0.0;
};
std::vector<PoissonCheckRow> run_poisson_check(int grid_n, const std::vector<double>& epsilons);

/// Single-run configuration: [datum], [numerics] and a [simulate] section
/// with N, epsilon, r, seed, init.
SimulationConfig parse_simulation_config(const KeyValueConfig& kv);

/// Fast built-in property checks; each entry is (name, passed, detail).
struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
};
std::vector<SuiteResult> run_unit_suite();

}  // namespace vpme
