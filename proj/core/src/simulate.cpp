#include "vpme/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "vpme/error.hpp"

namespace vpme {

InitMode parse_init_mode(const std::string& name) {
  if (name == "iid") return InitMode::iid;
  if (name == "quiet") return InitMode::quiet;
  throw InvalidArgument("unknown init mode '" + name + "'");
}

std::string to_string(InitMode m) { return m == InitMode::iid ? "iid" : "quiet"; }

void SimulationConfig::validate() const {
  f0.validate();
  if (n_particles == 0) throw InvalidArgument("simulation: N must be >= 1");
  if (!(epsilon > 0.0)) throw InvalidArgument("simulation: epsilon must be positive");
  if (!(t_end >= 0.0)) throw InvalidArgument("simulation: T must be >= 0");
  if (t_end > 0.0) {
    if (!(snapshot_interval > 0.0)) throw InvalidArgument("simulation: snapshot interval must be positive");
    const double k = t_end / snapshot_interval;
    if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k))
      throw InvalidArgument("simulation: T must be a multiple of the snapshot interval");
  }
  const TorusGrid g(f0.dim, grid_n);
  if (r < 2.0 * g.h()) throw InvalidArgument("simulation: r < 2h, mollifier under-resolved");
  if (r > 0.25) throw InvalidArgument("simulation: r must not exceed 1/4");
}

std::string SimulationConfig::canonical() const {
  std::ostringstream os;
  os.precision(17);
  os << canonical_string(f0) << ";N=" << n_particles << ";epsilon=" << epsilon << ";r=" << r << ";dt=" << dt
     << ";T=" << t_end << ";snapshot_interval=" << snapshot_interval << ";grid_n=" << grid_n << ";seed=" << seed
     << ";init=" << to_string(init) << ";scheme=" << to_string(scheme) << ";newton_tol=" << newton.tolerance
     << ";newton_cap=" << newton.max_iterations;
  return os.str();
}

std::uint64_t fnv1a64(const std::string& s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t SimulationConfig::hash() const { return fnv1a64(canonical()); }

ParticleEnsemble initial_ensemble(const SimulationConfig& cfg) {
  auto e = cfg.init == InitMode::iid ? sample_iid(cfg.f0, cfg.n_particles, cfg.seed) : quiet_start(cfg.f0, cfg.n_particles);
  e.epsilon = cfg.epsilon;
  e.r = cfg.r;
  e.time = 0.0;
  return e;
}

RunRecord simulate(const SimulationConfig& cfg) { return simulate(cfg, initial_ensemble(cfg)); }

RunRecord simulate(const SimulationConfig& cfg, ParticleEnsemble initial) {
  cfg.validate();
  initial.epsilon = cfg.epsilon;
  initial.r = cfg.r;
  initial.validate();

  const TorusGrid grid(cfg.f0.dim, cfg.grid_n);
  RunRecord rec;
  rec.config_hash = cfg.hash();
  rec.seed = cfg.seed;

  double dt = cfg.dt;
  if (dt <= 0.0) {
    const double vmax = std::max(initial.max_speed(), 1e-12);
    dt = std::min(1e-3, 0.1 * grid.h() / vmax);
  }
  std::size_t steps_per_snap = 0;
  std::size_t n_snaps = 0;
  if (cfg.t_end > 0.0) {
    steps_per_snap = static_cast<std::size_t>(std::ceil(cfg.snapshot_interval / dt - 1e-9));
    dt = cfg.snapshot_interval / static_cast<double>(steps_per_snap);
    n_snaps = static_cast<std::size_t>(std::llround(cfg.t_end / cfg.snapshot_interval));
  }
  rec.dt = dt;

  LeapfrogIntegrator integ(std::move(initial),
                           ForceEvaluator(grid, make_mollifier(cfg.r, grid), cfg.epsilon, cfg.scheme, cfg.newton));

  auto energy_now = [&] { return energy_from_potential(integ.state(), integ.evaluator().potential(), cfg.epsilon); };
  const double e0 = energy_now().total;

  auto record = [&](double t) {
    Snapshot s;
    s.time = t;
    s.energy = energy_now();
    s.support_radius = integ.state().max_speed();
    const auto& rho = integ.evaluator().density().values;
    s.max_density = *std::max_element(rho.begin(), rho.end());
    s.newton_iters = integ.evaluator().last_newton_iterations();
    if (cfg.store_ensembles) {
      s.ensemble = integ.state();
      s.ensemble->time = t;
    }
    rec.snapshots.push_back(std::move(s));
  };
  record(0.0);

  std::function<void(double, int)> advance = [&](double h, int depth) {
    try {
      integ.step(h);
    } catch (const SolverFailure&) {
      if (depth >= cfg.max_halvings) throw;
      advance(0.5 * h, depth + 1);
      advance(0.5 * h, depth + 1);
    }
  };

  try {
    for (std::size_t k = 1; k <= n_snaps; ++k) {
      for (std::size_t s = 0; s < steps_per_snap; ++s) {
        advance(dt, 0);
        ++rec.steps;
        const double drift = std::abs(energy_now().total - e0) / std::max(std::abs(e0), 1e-300);
        rec.max_relative_energy_drift = std::max(rec.max_relative_energy_drift, drift);
      }
      record(static_cast<double>(k) * cfg.snapshot_interval);
    }
  } catch (const Error& err) {
    rec.complete = false;
    rec.error = err.what();
  }
  return rec;
}

}  // namespace vpme
