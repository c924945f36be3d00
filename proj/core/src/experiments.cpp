#include "vpme/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "vpme/error.hpp"
#include "vpme/mollifier.hpp"
#include "vpme/poisson.hpp"
#include "vpme/spectral.hpp"

namespace vpme {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

void say(const ProgressFn& p, const std::string& msg) {
  if (p) p(msg);
}

SimulationConfig base_run(const ExperimentConfig& cfg) {
  SimulationConfig s;
  s.f0 = cfg.datum;
  s.grid_n = cfg.grid_n;
  s.t_end = cfg.t_end;
  s.dt = cfg.dt;
  s.snapshot_interval = cfg.snapshot_interval;
  s.scheme = cfg.scheme;
  s.store_ensembles = true;
  return s;
}

std::vector<double> snapshot_times(const RunRecord& r) {
  std::vector<double> t;
  for (const auto& s : r.snapshots) t.push_back(s.time);
  return t;
}

// Distances between matching snapshots of a run and a reference run.
void fill_distances(ConvergenceRow& row, const RunRecord& run, const RunRecord& ref, const MetricSpec& metric) {
  const std::size_t k = std::min(run.snapshots.size(), ref.snapshots.size());
  for (std::size_t s = 0; s < k; ++s)
    row.distances.push_back(wasserstein(to_cloud(*run.snapshots[s].ensemble), to_cloud(*ref.snapshots[s].ensemble),
                                        metric));
  row.sup_distance = row.distances.empty() ? std::numeric_limits<double>::quiet_NaN()
                                           : *std::max_element(row.distances.begin(), row.distances.end());
  row.complete = run.complete && ref.complete && k == ref.snapshots.size();
  if (!run.complete) row.note = run.error;
}

void summarize(ConvergenceTable& t) {
  t.sweep_values.clear();
  t.medians.clear();
  for (const auto& row : t.rows)
    if (std::find(t.sweep_values.begin(), t.sweep_values.end(), row.sweep_value) == t.sweep_values.end())
      t.sweep_values.push_back(row.sweep_value);
  for (double v : t.sweep_values) {
    std::vector<double> sups;
    for (const auto& row : t.rows)
      if (row.sweep_value == v && row.complete) sups.push_back(row.sup_distance);
    t.medians.push_back(median(sups));
  }
  if (t.sweep_values.size() >= 2) {
    const auto [slope, se] = loglog_slope(t.sweep_values, t.medians);
    t.slope = slope;
    t.slope_lo = slope - 2.0 * se;
    t.slope_hi = slope + 2.0 * se;
  }
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

}  // namespace

ExperimentKind parse_experiment_kind(const std::string& name) {
  if (name == "mean_field") return ExperimentKind::mean_field;
  if (name == "quasineutral") return ExperimentKind::quasineutral;
  if (name == "combined") return ExperimentKind::combined;
  if (name == "typicality") return ExperimentKind::typicality;
  if (name == "unit_suite") return ExperimentKind::unit_suite;
  throw InvalidArgument("unknown experiment kind '" + name + "'");
}

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::mean_field: return "mean_field";
    case ExperimentKind::quasineutral: return "quasineutral";
    case ExperimentKind::combined: return "combined";
    case ExperimentKind::typicality: return "typicality";
    case ExperimentKind::unit_suite: return "unit_suite";
  }
  return "unknown";
}

double gamma_bound_shared(int d) noexcept { return 1.0 / (d * (d + 2.0)); }

double gamma_bound_moments(int d, double k) noexcept {
  return std::min(1.0 / d, 1.0 - 4.0 / k) / (d + 2.0);
}

double exp3(double x) noexcept { return std::exp(std::exp(std::exp(x))); }

ComplianceReport exp3_compliance(double epsilon, double r, double K) {
  if (!(epsilon > 0.0) || !(r > 0.0) || !(K > 0.0)) throw InvalidArgument("exp3_compliance: arguments must be positive");
  ComplianceReport c;
  c.epsilon = epsilon;
  c.r = r;
  c.required_log3 = K / (epsilon * epsilon);
  const double l1 = std::log(1.0 / r);
  c.actual_log3 = (l1 > 1.0) ? std::log(std::log(l1)) : std::numeric_limits<double>::quiet_NaN();
  const double e3 = exp3(c.required_log3);
  c.bound_representable = std::isfinite(e3) && 1.0 / e3 > 0.0;
  c.r_max = c.bound_representable ? 1.0 / e3 : 0.0;
  c.status = c.bound_representable ? "representable" : "underflow";
  return c;
}

double ExperimentConfig::schedule_radius(std::size_t n) const {
  return c * std::pow(static_cast<double>(n), -gamma);
}

void ExperimentConfig::validate() {
  regime_notes.clear();
  datum.validate();
  metric.validate();
  const TorusGrid grid(datum.dim, grid_n);
  const double two_h = 2.0 * grid.h();
  auto regime = [&](const std::string& msg) {
    if (!override_regime) throw InvalidArgument(msg + " (pass the regime override to run anyway)");
    regime_notes.push_back(msg);
  };
  auto radius_ok = [&](double r, const std::string& what) {
    if (r < two_h) throw InvalidArgument(what + ": r = " + std::to_string(r) + " < 2h, mollifier under-resolved");
    if (r > 0.25) throw InvalidArgument(what + ": r must not exceed 1/4");
  };
  if (workers < 1) throw InvalidArgument("workers must be >= 1");
  if (kind != ExperimentKind::quasineutral && kind != ExperimentKind::unit_suite && seeds.empty())
    throw InvalidArgument("at least one seed is required");

  switch (kind) {
    case ExperimentKind::mean_field: {
      if (n_sweep.empty()) throw InvalidArgument("mean_field: empty N sweep");
      if (epsilon != 1.0) regime("mean_field: the mean-field study runs at epsilon = 1");
      if (!(gamma >= 0.0) || !(gamma < gamma_bound_shared(datum.dim)))
        regime("mean_field: gamma = " + std::to_string(gamma) + " violates gamma < 1/(d(d+2)) = " +
               std::to_string(gamma_bound_shared(datum.dim)));
      const std::size_t nmax = *std::max_element(n_sweep.begin(), n_sweep.end());
      if (n_ref < 4 * nmax) throw InvalidArgument("mean_field: N_ref must be at least 4x the largest N");
      for (auto n : n_sweep) {
        radius_ok(schedule_radius(n), "mean_field N=" + std::to_string(n));
        if (n_ref % n != 0) throw InvalidArgument("mean_field: N_ref must be a multiple of every N");
      }
      radius_ok(schedule_radius(n_ref), "mean_field reference");
      break;
    }
    case ExperimentKind::quasineutral: {
      if (eps_sweep.empty()) throw InvalidArgument("quasineutral: empty epsilon sweep");
      for (std::size_t i = 0; i < eps_sweep.size(); ++i) {
        if (!(eps_sweep[i] > 0.0)) throw InvalidArgument("quasineutral: epsilon must be positive");
        if (i && !(eps_sweep[i] < eps_sweep[i - 1])) throw InvalidArgument("quasineutral: epsilon sweep must decrease");
      }
      radius_ok(r_fixed, "quasineutral");
      if (n_fixed == 0) throw InvalidArgument("quasineutral: N must be positive");
      break;
    }
    case ExperimentKind::combined: {
      if (schedule.empty()) throw InvalidArgument("combined: empty schedule");
      for (std::size_t i = 0; i < schedule.size(); ++i) {
        const auto& p = schedule[i];
        if (!(p.epsilon > 0.0) || p.n == 0) throw InvalidArgument("combined: invalid schedule point");
        radius_ok(p.r, "combined point " + std::to_string(i));
        if (n_ref % p.n != 0) throw InvalidArgument("combined: N_ref must be a multiple of every N");
        if (i) {
          const auto& q = schedule[i - 1];
          if (!(p.n > q.n) || p.epsilon > q.epsilon || p.r > q.r)
            regime("combined: schedule must increase N while epsilon and r do not increase");
        }
      }
      radius_ok(r_ref, "combined reference");
      if (!(eps_ref > 0.0)) throw InvalidArgument("combined: reference epsilon must be positive");
      if (!(exp3_constant > 0.0)) throw InvalidArgument("combined: K must be positive");
      break;
    }
    case ExperimentKind::typicality: {
      if (n_sweep.size() < 2) throw InvalidArgument("typicality: at least two N values are required");
      if (seeds.size() < 200) throw InvalidArgument("typicality: at least 200 seeds per N are required");
      if (quadrature_factor < 4) throw InvalidArgument("typicality: quadrature size must be >= 4N");
      if (metric.p != 2) throw InvalidArgument("typicality: the tail study uses p = 2");
      if (!(tail_moment > 4.0)) throw InvalidArgument("typicality: moment order must exceed 2p = 4");
      if (!(tail_alpha > 0.0 && tail_alpha < tail_moment)) throw InvalidArgument("typicality: alpha must lie in (0, k)");
      if (tail_grid < 2) throw InvalidArgument("typicality: x grid needs at least two points");
      for (int d : dims)
        if (d != 2 && d != 3) throw InvalidArgument("typicality: dimensions must be 2 or 3");
      break;
    }
    case ExperimentKind::unit_suite: break;
  }
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream os;
  os.precision(17);
  os << "kind=" << to_string(kind) << ';' << canonical_string(datum) << ";grid_n=" << grid_n << ";T=" << t_end
     << ";dt=" << dt << ";snapshot_interval=" << snapshot_interval << ";scheme=" << to_string(scheme)
     << ";p=" << metric.p << ";lambda=" << metric.lambda << ";seeds=";
  for (std::size_t i = 0; i < seeds.size(); ++i) os << (i ? "," : "") << seeds[i];
  switch (kind) {
    case ExperimentKind::mean_field:
      os << ";N=";
      for (std::size_t i = 0; i < n_sweep.size(); ++i) os << (i ? "," : "") << n_sweep[i];
      os << ";N_ref=" << n_ref << ";gamma=" << gamma << ";c=" << c << ";epsilon=" << epsilon;
      break;
    case ExperimentKind::quasineutral:
      os << ";N=" << n_fixed << ";epsilon=" << join(eps_sweep) << ";r=" << r_fixed;
      break;
    case ExperimentKind::combined:
      os << ";schedule=";
      for (std::size_t i = 0; i < schedule.size(); ++i)
        os << (i ? "," : "") << schedule[i].n << ':' << schedule[i].epsilon << ':' << schedule[i].r;
      os << ";N_ref=" << n_ref << ";epsilon_ref=" << eps_ref << ";r_ref=" << r_ref << ";K=" << exp3_constant;
      break;
    case ExperimentKind::typicality:
      os << ";N=";
      for (std::size_t i = 0; i < n_sweep.size(); ++i) os << (i ? "," : "") << n_sweep[i];
      os << ";dims=";
      for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
      os << ";quadrature_factor=" << quadrature_factor << ";moment=" << tail_moment << ";tail_alpha=" << tail_alpha
         << ";grid=" << tail_grid;
      break;
    case ExperimentKind::unit_suite: break;
  }
  os << ";override_regime=" << (override_regime ? 1 : 0);
  return os.str();
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a64(canonical()); }

ExperimentConfig default_experiment_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.datum.family = DensityFamily::perturbed_maxwellian;
  c.datum.alpha = 0.2;
  c.datum.mode = 1;
  c.datum.dim = 2;
  switch (kind) {
    case ExperimentKind::mean_field:
      c.n_sweep = {256, 512, 1024, 2048, 4096};
      c.n_ref = 16384;
      c.seeds = {1, 2, 3, 4, 5};
      c.t_end = 0.5;
      c.dt = 1e-3;
      c.snapshot_interval = 0.125;
      break;
    case ExperimentKind::quasineutral:
      c.eps_sweep = {0.4, 0.2, 0.1};
      c.n_fixed = 4096;
      c.r_fixed = 0.0625;
      c.t_end = 0.2;
      c.dt = 5e-4;
      c.snapshot_interval = 0.05;
      c.metric.p = 1;
      break;
    case ExperimentKind::combined:
      c.schedule = {{1024, 0.4, 0.08}, {2048, 0.3, 0.06}, {4096, 0.2, 0.045}};
      c.n_ref = 16384;
      c.eps_ref = 0.2;
      c.r_ref = 0.035;
      c.seeds = {1, 2, 3};
      c.t_end = 0.2;
      c.dt = 5e-4;
      c.snapshot_interval = 0.05;
      c.metric.p = 1;
      break;
    case ExperimentKind::typicality:
      c.n_sweep = {128, 512, 2048};
      c.seeds.resize(200);
      for (std::size_t i = 0; i < c.seeds.size(); ++i) c.seeds[i] = i + 1;
      c.dims = {2, 3};
      c.t_end = 0.0;
      break;
    case ExperimentKind::unit_suite: break;
  }
  return c;
}

ExperimentConfig parse_experiment_config(const KeyValueConfig& kv) {
  const std::string kind_name = kv.get_string("experiment", "kind", "");
  if (kind_name.empty()) throw InvalidArgument("config: [experiment] kind is required");
  ExperimentConfig c = default_experiment_config(parse_experiment_kind(kind_name));
  const std::string section = to_string(c.kind);
  std::map<std::string, std::set<std::string>> allowed{
      {"experiment", {"kind", "seeds", "seed_count", "workers", "override_regime"}},
      {"datum", {"family", "dim", "thermal_speed", "support_radius", "alpha", "mode"}},
      {"numerics", {"grid_n", "T", "dt", "snapshot_interval", "scheme"}},
      {"metric", {"p", "lambda"}},
  };
  switch (c.kind) {
    case ExperimentKind::mean_field: allowed[section] = {"N", "N_ref", "gamma", "c", "epsilon"}; break;
    case ExperimentKind::quasineutral: allowed[section] = {"N", "epsilon", "r"}; break;
    case ExperimentKind::combined: allowed[section] = {"schedule", "N_ref", "epsilon_ref", "r_ref", "K"}; break;
    case ExperimentKind::typicality:
      allowed[section] = {"N", "dims", "quadrature_factor", "moment", "tail_alpha", "grid"};
      break;
    case ExperimentKind::unit_suite: break;
  }
  kv.require_known(allowed);

  auto sizes = [](const std::vector<long long>& v, const std::string& what) {
    std::vector<std::size_t> out;
    for (auto x : v) {
      if (x <= 0) throw InvalidArgument(what + ": values must be positive");
      out.push_back(static_cast<std::size_t>(x));
    }
    return out;
  };

  if (kv.has("experiment", "seeds") && kv.has("experiment", "seed_count"))
    throw InvalidArgument("config: give either seeds or seed_count");
  if (kv.has("experiment", "seeds")) {
    c.seeds.clear();
    for (auto s : kv.get_ints("experiment", "seeds", {})) {
      if (s < 0) throw InvalidArgument("config: seeds must be nonnegative");
      c.seeds.push_back(static_cast<std::uint64_t>(s));
    }
  }
  if (kv.has("experiment", "seed_count")) {
    const auto n = kv.get_int("experiment", "seed_count", 0);
    if (n <= 0) throw InvalidArgument("config: seed_count must be positive");
    c.seeds.resize(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < c.seeds.size(); ++i) c.seeds[i] = i + 1;
  }
  c.workers = static_cast<int>(kv.get_int("experiment", "workers", c.workers));
  c.override_regime = kv.get_bool("experiment", "override_regime", c.override_regime);

  c.datum.family = parse_density_family(kv.get_string("datum", "family", to_string(c.datum.family)));
  c.datum.dim = static_cast<int>(kv.get_int("datum", "dim", c.datum.dim));
  c.datum.thermal_speed = kv.get_double("datum", "thermal_speed", c.datum.thermal_speed);
  c.datum.support_radius = kv.get_double("datum", "support_radius", c.datum.support_radius);
  c.datum.alpha = kv.get_double("datum", "alpha", c.datum.alpha);
  c.datum.mode = static_cast<int>(kv.get_int("datum", "mode", c.datum.mode));

  c.grid_n = static_cast<int>(kv.get_int("numerics", "grid_n", c.grid_n));
  c.t_end = kv.get_double("numerics", "T", c.t_end);
  c.dt = kv.get_double("numerics", "dt", c.dt);
  c.snapshot_interval = kv.get_double("numerics", "snapshot_interval", c.snapshot_interval);
  c.scheme = parse_deposition_scheme(kv.get_string("numerics", "scheme", to_string(c.scheme)));

  c.metric.p = static_cast<int>(kv.get_int("metric", "p", c.metric.p));
  c.metric.lambda = kv.get_double("metric", "lambda", c.metric.lambda);

  switch (c.kind) {
    case ExperimentKind::mean_field: {
      std::vector<long long> def(c.n_sweep.begin(), c.n_sweep.end());
      c.n_sweep = sizes(kv.get_ints(section, "N", def), "mean_field.N");
      c.n_ref = static_cast<std::size_t>(kv.get_int(section, "N_ref", static_cast<long long>(c.n_ref)));
      c.gamma = kv.get_double(section, "gamma", c.gamma);
      c.c = kv.get_double(section, "c", c.c);
      c.epsilon = kv.get_double(section, "epsilon", c.epsilon);
      break;
    }
    case ExperimentKind::quasineutral:
      c.n_fixed = static_cast<std::size_t>(kv.get_int(section, "N", static_cast<long long>(c.n_fixed)));
      c.eps_sweep = kv.get_doubles(section, "epsilon", c.eps_sweep);
      c.r_fixed = kv.get_double(section, "r", c.r_fixed);
      break;
    case ExperimentKind::combined: {
      if (kv.has(section, "schedule")) {
        c.schedule.clear();
        for (const auto& tok : split_list(kv.get_string(section, "schedule", ""))) {
          const auto a = tok.find(':');
          const auto b = tok.find(':', a == std::string::npos ? a : a + 1);
          if (a == std::string::npos || b == std::string::npos)
            throw InvalidArgument("combined.schedule: expected N:epsilon:r entries, got '" + tok + "'");
          SchedulePoint p;
          try {
            p.n = static_cast<std::size_t>(std::stoull(tok.substr(0, a)));
            p.epsilon = std::stod(tok.substr(a + 1, b - a - 1));
            p.r = std::stod(tok.substr(b + 1));
          } catch (const std::exception&) {
            throw InvalidArgument("combined.schedule: malformed entry '" + tok + "'");
          }
          c.schedule.push_back(p);
        }
      }
      c.n_ref = static_cast<std::size_t>(kv.get_int(section, "N_ref", static_cast<long long>(c.n_ref)));
      c.eps_ref = kv.get_double(section, "epsilon_ref", c.eps_ref);
      c.r_ref = kv.get_double(section, "r_ref", c.r_ref);
      c.exp3_constant = kv.get_double(section, "K", c.exp3_constant);
      break;
    }
    case ExperimentKind::typicality: {
      std::vector<long long> def(c.n_sweep.begin(), c.n_sweep.end());
      c.n_sweep = sizes(kv.get_ints(section, "N", def), "typicality.N");
      std::vector<long long> ddef(c.dims.begin(), c.dims.end());
      c.dims.clear();
      for (auto d : kv.get_ints(section, "dims", ddef)) c.dims.push_back(static_cast<int>(d));
      c.quadrature_factor =
          static_cast<std::size_t>(kv.get_int(section, "quadrature_factor", static_cast<long long>(c.quadrature_factor)));
      c.tail_moment = kv.get_double(section, "moment", c.tail_moment);
      c.tail_alpha = kv.get_double(section, "tail_alpha", c.tail_alpha);
      c.tail_grid = static_cast<int>(kv.get_int(section, "grid", c.tail_grid));
      break;
    }
    case ExperimentKind::unit_suite: break;
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(KeyValueConfig::load(path));
}

std::pair<double, double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("loglog_slope: need two or more matching points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidArgument("loglog_slope: values must be positive");
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("loglog_slope: x values must differ");
  const double slope = sxy / sxx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double res = std::log(y[i]) - my - slope * (std::log(x[i]) - mx);
    rss += res * res;
  }
  const double se = x.size() > 2 ? std::sqrt(rss / (n - 2.0) / sxx) : 0.0;
  return {slope, se};
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mutex;
  std::vector<std::thread> pool;
  const auto nthreads = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
  for (std::size_t t = 0; t < nthreads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

ConvergenceTable run_mean_field(const ExperimentConfig& cfg_in, const ProgressFn& progress) {
  ExperimentConfig cfg = cfg_in;
  if (cfg.kind != ExperimentKind::mean_field) throw InvalidArgument("run_mean_field: wrong experiment kind");
  cfg.validate();
  ConvergenceTable table;
  table.experiment = "mean_field";

  auto t0 = std::chrono::steady_clock::now();
  SimulationConfig ref_cfg = base_run(cfg);
  ref_cfg.n_particles = cfg.n_ref;
  ref_cfg.epsilon = cfg.epsilon;
  ref_cfg.r = cfg.schedule_radius(cfg.n_ref);
  ref_cfg.init = InitMode::quiet;
  say(progress, "mean_field: reference N=" + std::to_string(cfg.n_ref));
  const RunRecord ref = simulate(ref_cfg);
  if (!ref.complete) throw SolverFailure("mean_field: reference run failed: " + ref.error, 0.0, 0);
  table.reference_runtime_s = seconds_since(t0);
  table.times = snapshot_times(ref);
  table.reference = "quiet start N=" + std::to_string(cfg.n_ref) + " r=" + std::to_string(ref_cfg.r);

  struct Job {
    std::size_t n;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (auto n : cfg.n_sweep)
    for (auto s : cfg.seeds) jobs.push_back({n, s});
  table.rows.resize(jobs.size());
  parallel_for(jobs.size(), cfg.workers, [&](std::size_t i) {
    const auto t1 = std::chrono::steady_clock::now();
    SimulationConfig sc = base_run(cfg);
    sc.n_particles = jobs[i].n;
    sc.epsilon = cfg.epsilon;
    sc.r = cfg.schedule_radius(jobs[i].n);
    sc.seed = jobs[i].seed;
    sc.init = InitMode::iid;
    const RunRecord run = simulate(sc);
    ConvergenceRow& row = table.rows[i];
    row.sweep_value = static_cast<double>(jobs[i].n);
    row.seed = jobs[i].seed;
    fill_distances(row, run, ref, cfg.metric);
    row.aux = row.distances.empty() ? std::numeric_limits<double>::quiet_NaN()
                                    : row.distances[0] / std::pow(sc.r, (cfg.datum.dim + 2) / 2.0);
    row.runtime_s = seconds_since(t1);
    say(progress, "mean_field: N=" + std::to_string(jobs[i].n) + " seed=" + std::to_string(jobs[i].seed) +
                      " sup W=" + std::to_string(row.sup_distance));
  });
  summarize(table);
  return table;
}

ConvergenceTable run_quasineutral(const ExperimentConfig& cfg_in, const ProgressFn& progress) {
  ExperimentConfig cfg = cfg_in;
  if (cfg.kind != ExperimentKind::quasineutral) throw InvalidArgument("run_quasineutral: wrong experiment kind");
  cfg.validate();
  ConvergenceTable table;
  table.experiment = "quasineutral";
  table.reference = "epsilon-Cauchy differences between consecutive sweep values, quiet start N=" +
                    std::to_string(cfg.n_fixed);

  std::vector<RunRecord> runs(cfg.eps_sweep.size());
  std::vector<double> runtimes(cfg.eps_sweep.size(), 0.0);
  parallel_for(cfg.eps_sweep.size(), cfg.workers, [&](std::size_t i) {
    const auto t1 = std::chrono::steady_clock::now();
    SimulationConfig sc = base_run(cfg);
    sc.n_particles = cfg.n_fixed;
    sc.epsilon = cfg.eps_sweep[i];
    sc.r = cfg.r_fixed;
    sc.init = InitMode::quiet;
    runs[i] = simulate(sc);
    runtimes[i] = seconds_since(t1);
    say(progress, "quasineutral: eps=" + std::to_string(cfg.eps_sweep[i]) +
                      (runs[i].complete ? " done" : " failed: " + runs[i].error));
  });
  if (!runs.empty()) table.times = snapshot_times(runs[0]);

  for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
    const auto t1 = std::chrono::steady_clock::now();
    ConvergenceRow row;
    row.sweep_value = cfg.eps_sweep[i];
    row.aux = cfg.eps_sweep[i + 1];
    fill_distances(row, runs[i], runs[i + 1], cfg.metric);
    for (std::size_t j : {i, i + 1})
      if (!runs[j].complete)
        row.note = "field solve failed at eps=" + std::to_string(cfg.eps_sweep[j]) + " (" + runs[j].error +
                   "); hint: reduce dt or insert intermediate epsilon values so warm starts stay close";
    row.runtime_s = runtimes[i] + seconds_since(t1);
    table.rows.push_back(row);
  }
  summarize(table);
  return table;
}

ConvergenceTable run_combined(const ExperimentConfig& cfg_in, const ProgressFn& progress) {
  ExperimentConfig cfg = cfg_in;
  if (cfg.kind != ExperimentKind::combined) throw InvalidArgument("run_combined: wrong experiment kind");
  cfg.validate();
  ConvergenceTable table;
  table.experiment = "combined";

  auto t0 = std::chrono::steady_clock::now();
  SimulationConfig ref_cfg = base_run(cfg);
  ref_cfg.n_particles = cfg.n_ref;
  ref_cfg.epsilon = cfg.eps_ref;
  ref_cfg.r = cfg.r_ref;
  ref_cfg.init = InitMode::quiet;
  say(progress, "combined: reference N=" + std::to_string(cfg.n_ref));
  const RunRecord ref = simulate(ref_cfg);
  if (!ref.complete) throw SolverFailure("combined: reference run failed: " + ref.error, 0.0, 0);
  table.reference_runtime_s = seconds_since(t0);
  table.times = snapshot_times(ref);
  table.reference = "quiet start N=" + std::to_string(cfg.n_ref) + " eps=" + std::to_string(cfg.eps_ref) +
                    " r=" + std::to_string(cfg.r_ref);
  for (const auto& p : cfg.schedule) table.compliance.push_back(exp3_compliance(p.epsilon, p.r, cfg.exp3_constant));

  struct Job {
    std::size_t point;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t p = 0; p < cfg.schedule.size(); ++p)
    for (auto s : cfg.seeds) jobs.push_back({p, s});
  table.rows.resize(jobs.size());
  parallel_for(jobs.size(), cfg.workers, [&](std::size_t i) {
    const auto t1 = std::chrono::steady_clock::now();
    const auto& pt = cfg.schedule[jobs[i].point];
    SimulationConfig sc = base_run(cfg);
    sc.n_particles = pt.n;
    sc.epsilon = pt.epsilon;
    sc.r = pt.r;
    sc.seed = jobs[i].seed;
    sc.init = InitMode::iid;
    const RunRecord run = simulate(sc);
    ConvergenceRow& row = table.rows[i];
    row.sweep_value = static_cast<double>(pt.n);
    row.seed = jobs[i].seed;
    fill_distances(row, run, ref, cfg.metric);
    row.aux = table.compliance[jobs[i].point].required_log3;
    row.runtime_s = seconds_since(t1);
    say(progress, "combined: N=" + std::to_string(pt.n) + " seed=" + std::to_string(jobs[i].seed) +
                      " sup W=" + std::to_string(row.sup_distance));
  });
  summarize(table);
  return table;
}

TailFit fit_tail_bound(int dim, const std::vector<std::size_t>& n_values,
                       const std::vector<std::vector<double>>& samples, double moment, double alpha, int grid,
                       std::vector<TailPoint>* points) {
  if (n_values.size() != samples.size() || n_values.empty()) throw InvalidArgument("fit_tail_bound: shape mismatch");
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& s : samples) {
    if (s.empty()) throw InvalidArgument("fit_tail_bound: empty sample set");
    for (double v : s) {
      if (!(v > 0.0)) throw InvalidArgument("fit_tail_bound: samples must be positive");
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  std::vector<double> xs(static_cast<std::size_t>(grid));
  const double x0 = 0.5 * lo;
  const double x1 = 2.0 * hi;
  for (int g = 0; g < grid; ++g) xs[static_cast<std::size_t>(g)] = x0 * std::pow(x1 / x0, g / (grid - 1.0));

  struct Cell {
    std::size_t ni;
    double x;
    double emp;
    double se;
  };
  std::vector<Cell> cells;
  for (std::size_t ni = 0; ni < n_values.size(); ++ni) {
    const double s = static_cast<double>(samples[ni].size());
    for (double x : xs) {
      const double cnt = static_cast<double>(std::count_if(samples[ni].begin(), samples[ni].end(),
                                                           [&](double v) { return v >= x; }));
      const double emp = cnt / s;
      cells.push_back({ni, x, emp, std::sqrt(emp * (1.0 - emp) / s)});
    }
  }

  TailParams tp;
  tp.m = 2 * dim;
  tp.p = 2;
  tp.k = moment;
  tp.alpha = alpha;
  tp.mode = TailMode::moment;
  auto shape = [&](double c, const Cell& cell) {
    tp.c = c;
    tp.C = 1.0;
    return fg_tail(static_cast<double>(n_values[cell.ni]), cell.x, tp).bound;
  };

  TailFit fit;
  fit.dim = dim;
  fit.n_values = n_values;
  double best_score = std::numeric_limits<double>::infinity();
  for (int e = 0; e <= 200; ++e) {
    const double c = std::pow(10.0, -3.0 + 0.05 * e);
    double cmin = 1e-300;
    bool feasible = true;
    for (const auto& cell : cells) {
      const double need = cell.emp - 2.0 * cell.se;
      if (need <= 0.0) continue;
      const double s = shape(c, cell);
      if (!(s > 0.0)) {
        feasible = false;
        break;
      }
      cmin = std::max(cmin, need / s);
    }
    if (!feasible) continue;
    double score = 0.0;
    for (const auto& cell : cells) score += std::min(1.0, cmin * shape(c, cell));
    if (score < best_score) {
      best_score = score;
      fit.c = c;
      fit.C = cmin;
    }
  }
  if (!std::isfinite(best_score)) throw SolverFailure("fit_tail_bound: no dominating constant pair on the c grid", 0, 0);

  fit.dominates_all = true;
  std::vector<bool> informative(n_values.size(), false);
  tp.c = fit.c;
  tp.C = fit.C;
  for (const auto& cell : cells) {
    const auto tb = fg_tail(static_cast<double>(n_values[cell.ni]), cell.x, tp);
    TailPoint pt;
    pt.dim = dim;
    pt.n = n_values[cell.ni];
    pt.x = cell.x;
    pt.empirical = cell.emp;
    pt.std_error = cell.se;
    pt.a = tb.a;
    pt.b = tb.b;
    pt.bound = tb.bound;
    pt.dominated = cell.emp <= tb.bound + 2.0 * cell.se + 1e-12;
    fit.dominates_all = fit.dominates_all && pt.dominated;
    if (cell.emp > 0.0 && tb.bound < 1.0) informative[cell.ni] = true;
    if (points) points->push_back(pt);
  }
  fit.informative = std::all_of(informative.begin(), informative.end(), [](bool b) { return b; });
  for (const auto& s : samples) fit.medians.push_back(median(s));
  std::vector<double> nx(n_values.begin(), n_values.end());
  if (n_values.size() >= 2) fit.median_slope = loglog_slope(nx, fit.medians).first;
  return fit;
}

TailTable run_typicality(const ExperimentConfig& cfg_in, const ProgressFn& progress) {
  ExperimentConfig cfg = cfg_in;
  if (cfg.kind != ExperimentKind::typicality) throw InvalidArgument("run_typicality: wrong experiment kind");
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  TailTable table;
  for (int d : cfg.dims) {
    DensitySpec f0 = cfg.datum;
    f0.dim = d;
    std::vector<std::vector<double>> samples(cfg.n_sweep.size());
    std::vector<double> floors;
    for (std::size_t ni = 0; ni < cfg.n_sweep.size(); ++ni) {
      const std::size_t n = cfg.n_sweep[ni];
      say(progress, "typicality: d=" + std::to_string(d) + " N=" + std::to_string(n) + " quadrature");
      const auto quad = make_quadrature(f0, cfg.quadrature_factor * n, cfg.metric, true);
      floors.push_back(quad.r_quad);
      samples[ni].assign(cfg.seeds.size(), 0.0);
      parallel_for(cfg.seeds.size(), cfg.workers, [&](std::size_t si) {
        const auto e = sample_iid(f0, n, cfg.seeds[si]);
        const auto res = semi_discrete_distance(quad, e, cfg.metric);
        samples[ni][si] = res.distance * res.distance;
      });
      say(progress, "typicality: d=" + std::to_string(d) + " N=" + std::to_string(n) +
                        " median W2^2=" + std::to_string(median(samples[ni])));
    }
    auto fit = fit_tail_bound(d, cfg.n_sweep, samples, cfg.tail_moment, cfg.tail_alpha, cfg.tail_grid, &table.points);
    fit.r_quad = floors;
    table.fits.push_back(fit);
    table.samples.push_back(std::move(samples));
  }
  table.runtime_s = seconds_since(t0);
  return table;
}

std::vector<PoissonCheckRow> run_poisson_check(int grid_n, const std::vector<double>& epsilons) {
  const TorusGrid g(2, grid_n);
  const double tau = 2.0 * std::numbers::pi;
  auto ustar = sample(g, [&](const Vec& x) { return 0.1 * std::cos(tau * x[0]) + 0.05 * std::sin(tau * (x[0] + x[1])); });
  double mass = 0.0;
  for (double v : ustar.values) mass += std::exp(v) / static_cast<double>(g.cells());
  for (double& v : ustar.values) v -= std::log(mass);
  const auto lap = sample(g, [&](const Vec& x) {
    return -tau * tau * (0.1 * std::cos(tau * x[0]) + 0.1 * std::sin(tau * (x[0] + x[1])));
  });
  const auto& sp = Spectral::for_grid(g);

  std::vector<PoissonCheckRow> rows;
  for (double eps : epsilons) {
    ScalarField rho(g);
    for (std::size_t i = 0; i < g.cells(); ++i) rho.values[i] = std::exp(ustar.values[i]) - eps * eps * lap.values[i];
    const auto t0 = std::chrono::steady_clock::now();
    const auto sol = solve_full_potential(rho, eps);
    PoissonCheckRow row;
    row.runtime_s = seconds_since(t0);
    row.epsilon = eps;
    row.newton_iters = sol.newton_iters;
    row.max_error = max_abs_diff(sol.u_total.values, ustar.values);
    double mean_exp = 0.0;
    for (double v : sol.u_total.values) mean_exp += std::exp(v) / static_cast<double>(g.cells());
    row.neutrality_error = std::abs(mean_exp - 1.0);
    std::vector<double> sum(g.cells());
    for (std::size_t i = 0; i < g.cells(); ++i) sum[i] = sol.u_bar.values[i] + sol.u_hat.values[i];
    const auto lap_full = sp.laplacian(sum);
    const auto lap_hat = sp.laplacian(sol.u_hat.values);
    for (std::size_t i = 0; i < g.cells(); ++i) {
      const double eu = std::exp(sol.u_total.values[i]);
      row.full_residual = std::max(row.full_residual, std::abs(eps * eps * lap_full[i] - eu + rho.values[i]));
      row.hat_residual = std::max(row.hat_residual, std::abs(eps * eps * lap_hat[i] - eu + 1.0));
    }
    rows.push_back(row);
  }
  return rows;
}

SimulationConfig parse_simulation_config(const KeyValueConfig& kv) {
  kv.require_known({
      {"datum", {"family", "dim", "thermal_speed", "support_radius", "alpha", "mode"}},
      {"numerics", {"grid_n", "T", "dt", "snapshot_interval", "scheme"}},
      {"simulate", {"N", "epsilon", "r", "seed", "init", "store_ensembles"}},
  });
  SimulationConfig s;
  s.f0.family = parse_density_family(kv.get_string("datum", "family", to_string(s.f0.family)));
  s.f0.dim = static_cast<int>(kv.get_int("datum", "dim", s.f0.dim));
  s.f0.thermal_speed = kv.get_double("datum", "thermal_speed", s.f0.thermal_speed);
  s.f0.support_radius = kv.get_double("datum", "support_radius", s.f0.support_radius);
  s.f0.alpha = kv.get_double("datum", "alpha", s.f0.alpha);
  s.f0.mode = static_cast<int>(kv.get_int("datum", "mode", s.f0.mode));
  s.grid_n = static_cast<int>(kv.get_int("numerics", "grid_n", s.grid_n));
  s.t_end = kv.get_double("numerics", "T", s.t_end);
  s.dt = kv.get_double("numerics", "dt", s.dt);
  s.snapshot_interval = kv.get_double("numerics", "snapshot_interval", s.snapshot_interval);
  s.scheme = parse_deposition_scheme(kv.get_string("numerics", "scheme", to_string(s.scheme)));
  const auto n = kv.get_int("simulate", "N", static_cast<long long>(s.n_particles));
  if (n <= 0) throw InvalidArgument("simulate.N must be positive");
  s.n_particles = static_cast<std::size_t>(n);
  s.epsilon = kv.get_double("simulate", "epsilon", s.epsilon);
  s.r = kv.get_double("simulate", "r", s.r);
  const auto seed = kv.get_int("simulate", "seed", static_cast<long long>(s.seed));
  if (seed < 0) throw InvalidArgument("simulate.seed must be nonnegative");
  s.seed = static_cast<std::uint64_t>(seed);
  s.init = parse_init_mode(kv.get_string("simulate", "init", to_string(s.init)));
  s.store_ensembles = kv.get_bool("simulate", "store_ensembles", s.store_ensembles);
  s.validate();
  return s;
}

std::vector<SuiteResult> run_unit_suite() {
  std::vector<SuiteResult> out;
  auto check = [&](const std::string& name, const std::function<std::string(bool&)>& body) {
    SuiteResult r;
    r.name = name;
    try {
      r.detail = body(r.passed);
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    out.push_back(r);
  };

  check("manufactured nonlinear Poisson solve", [](bool& ok) {
    const TorusGrid g(2, 64);
    auto ustar = sample(g, [](const Vec& x) { return 0.1 * std::cos(2.0 * std::numbers::pi * x[0]); });
    double m = 0.0;
    for (double v : ustar.values) m += std::exp(v) / static_cast<double>(g.cells());
    for (double& v : ustar.values) v -= std::log(m);
    ScalarField rho(g);
    for (std::size_t i = 0; i < g.cells(); ++i)
      rho.values[i] = std::exp(ustar.values[i]) + 0.1 * 4.0 * std::numbers::pi * std::numbers::pi *
                                                      std::cos(2.0 * std::numbers::pi * g.node(i)[0]);
    const auto sol = solve_full_potential(rho, 1.0);
    const double err = max_abs_diff(sol.u_total.values, ustar.values);
    ok = err <= 1e-8;
    return "max error " + sci(err);
  });

  check("pair force vanishes at the origin and is odd", [](bool& ok) {
    const TorusGrid g(2, 64);
    const auto f = regularized_pair_force(make_mollifier(0.1, g));
    double at0 = 0.0;
    double odd = 0.0;
    for (std::size_t c = 0; c < g.cells(); ++c) {
      const auto ij = g.coords(c);
      const auto m = g.index(-ij[0], -ij[1]);
      for (int a = 0; a < 2; ++a) odd = std::max(odd, std::abs(f.components[a][c] + f.components[a][m]));
    }
    for (int a = 0; a < 2; ++a) at0 = std::max(at0, std::abs(f.components[a][0]));
    ok = at0 <= 1e-12 && odd <= 1e-12;
    return "|F(0)| " + sci(at0) + ", oddness " + sci(odd);
  });

  check("exact transport against permutation enumeration", [](bool& ok) {
    DensitySpec f;
    const auto a = to_cloud(sample_iid(f, 6, 11));
    const auto b = to_cloud(sample_iid(f, 6, 12));
    const MetricSpec spec;
    std::vector<std::size_t> perm{0, 1, 2, 3, 4, 5};
    double best = std::numeric_limits<double>::infinity();
    do {
      double s = 0.0;
      for (std::size_t i = 0; i < 6; ++i) s += phase_space_cost(a.x[i], a.v[i], b.x[perm[i]], b.v[perm[i]], 2, spec);
      best = std::min(best, s / 6.0);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const double got = wasserstein_exact(a, b, spec).plan.total_cost;
    ok = std::abs(got - best) <= 1e-12;
    return "exact " + sci(got) + " brute force " + sci(best);
  });

  check("auction agrees with exact assignment", [](bool& ok) {
    DensitySpec f;
    const auto a = to_cloud(sample_iid(f, 128, 21));
    const auto b = to_cloud(sample_iid(f, 128, 22));
    const MetricSpec spec;
    const auto ex = wasserstein_exact(a, b, spec);
    const auto au = wasserstein_auction(a, b, spec);
    const double gap = au.plan.total_cost - ex.plan.total_cost;
    ok = gap >= -1e-12 && gap <= au.error_bound + 1e-12;
    return "cost gap " + sci(gap) + " bound " + sci(au.error_bound);
  });

  check("free streaming of a neutral lattice", [](bool& ok) {
    DensitySpec f;
    f.family = DensityFamily::cold_uniform;
    auto e = quiet_start(f, 4096);
    for (auto& v : e.velocities) v = Vec{0.3, -0.2, 0.0};
    const TorusGrid g(2, 64);
    const auto m = make_mollifier(0.0625, g);
    const auto next = leapfrog_step(e, 1e-3, g, m);
    double err = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i)
      for (int a = 0; a < 2; ++a) {
        const double expect = wrap_unit(e.positions[i][a] + 1e-3 * e.velocities[i][a]);
        double dx = std::abs(next.positions[i][a] - expect);
        err = std::max(err, std::min(dx, 1.0 - dx));
      }
    ok = err <= 1e-9;
    return "max position error " + sci(err);
  });

  check("concentration bound branch selection", [](bool& ok) {
    TailParams t;
    t.m = 4;
    const double x = 0.05;
    const auto r4 = fg_tail(100, x, t);
    const double y = x / std::log(2.0 + 1.0 / x);
    t.m = 6;
    const auto r6 = fg_tail(100, x, t);
    ok = std::abs(r4.a - std::exp(-100.0 * y * y)) <= 1e-15 && std::abs(r6.a - std::exp(-100.0 * x * x * x)) <= 1e-15;
    return "a(m=4) " + sci(r4.a) + ", a(m=6) " + sci(r6.a);
  });
  return out;
}

}  // namespace vpme
